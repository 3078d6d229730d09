"""Общие типы, используемые в проекте.

Вынесено в отдельный модуль, чтобы не дублировать объявления в разных файлах.
"""

from typing import Dict, Tuple

# Вектор показателей одного монома: (e_0, ..., e_{N-1})
Exponent = Tuple[int, ...]

# Разреженный многочлен: вектор показателей → код ненулевого коэффициента
Terms = Dict[Exponent, int]

# Гистограмма слоёв: код элемента t → #F^{-1}(t)
Counts = Tuple[int, ...]

# Полуинтервал индексов точек [start, stop) для одного рабочего процесса
IndexRange = Tuple[int, int]
