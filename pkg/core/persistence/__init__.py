# Persistence package: on-disk formats for datasets, models and results.
