# Test package for ffbias
