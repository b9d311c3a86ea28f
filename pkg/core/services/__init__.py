# Services package: numerical kernels and pipelines.
