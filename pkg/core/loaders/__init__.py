# Loaders package: run configuration documents.
