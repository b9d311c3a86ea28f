# Ports package: Protocols the evaluation engine depends on.
