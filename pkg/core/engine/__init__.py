# Engine package: evaluation orchestration over services.
