from .circuits import (FAMILIES, MAX_QUBITS, AnsatzDescriptor, CircuitTemplate, GateOp, bind, build_ansatz,
                       custom_template, inverse_template, parameter_count)
from .entanglement import entangling_capability, meyer_wallach
from .statevector import (InitStrategy, StateVector, analytic_probabilities, apply_circuit, born_sample,
                          map_to_range, prepare_initial_state)
from .transpile import circuit_depth, transpile, transpile_depth
