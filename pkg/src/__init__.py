# ffbias: finite-field bias, rank and singularity laboratory
