"""Файл настроек лаборатории ffbias.

Все параметры по умолчанию задаются здесь, чтобы их можно было менять в одном
месте. Флаги командной строки и файл конфигурации эксперимента переопределяют
только то, что передано явно.
"""

from enum import Enum


class Variety(Enum):
    """Какое многообразие описывает отчёт.

    * X – гиперповерхность старшей однородной части в P^{N-1}
    * Y – замыкание аффинной гиперповерхности F = t в P^N
    """

    X = "X"
    Y = "Y"


class RankMethod(Enum):
    """Метки методов для нижней и верхней оценки ранга."""

    QUADRATIC_EXACT = "quadratic-exact"
    WITNESS_SEARCH = "witness-search"
    SING_CODIM = "sing-codim"
    DEGENERATE = "degenerate"


class Verdict(Enum):
    """Итог проверки c-хорошести."""

    GOOD = "c-good"
    NOT_GOOD = "not-c-good"
    INCONCLUSIVE = "inconclusive"


class Plant(Enum):
    """Семейства «посаженных» многочленов для ансамблей."""

    NONE = "none"
    HYPERBOLIC = "hyperbolic"
    PRODUCT = "product"


# Максимальное число элементов поля (бюджет машинного слова).
MAX_FIELD_SIZE: int = 2**20

# Бюджет вычислений для одного перебора q^{nN} точек.
DEFAULT_BUDGET: int = 10**8

# Глубина башни расширений для оценки смещения.
DEFAULT_N_MAX: int = 4

# Глубина башни для подсчёта особых точек.
DEFAULT_SING_N_MAX: int = 3

# Сколько точек обрабатывается за один векторизованный блок.
CHUNK_SIZE: int = 1 << 16

# Поля не больше этого размера получают таблицы сложения и умножения.
TABLE_LIMIT: int = 1024

# Допуск при округлении наклона роста числа точек до целой размерности.
SLOPE_TOLERANCE: float = 0.25

# Сколько особых точек перечислять в отчёте на каждом уровне.
POINT_CAP: int = 64

# Число случайных попыток при поиске разложения-свидетеля.
DEFAULT_SEARCH_BUDGET: int = 2000

# Версия схемы JSON-отчётов.
SCHEMA_VERSION: int = 1

# Переменная окружения с числом рабочих процессов по умолчанию.
WORKERS_ENV: str = "FFBIAS_WORKERS"

# Переменная окружения с уровнем логов (DEBUG, INFO, WARNING, ...).
LOG_LEVEL_ENV: str = "FFBIAS_LOG_LEVEL"
