"""Dense simulator for resource correction on small stabilizer codes."""
from rescorr.channels import KrausChannel, MeasurementChannel, PauliChannel, channel_from_spec
from rescorr.codes import StabilizerCode, get_code, logical_basis, logical_state
from rescorr.conditions import CorrectabilityReport, coherence_invariance_check, kl_gram
from rescorr.decoding import DecoderTable, build_table, certify_gauge_equivalence, gauge_decode, recover
from rescorr.measures import IncoherentBasis, l1_coherence, negativity, physical_pauli_basis
from rescorr.pauli import PauliString

__version__ = "0.1.0"

__all__ = [
    "CorrectabilityReport",
    "DecoderTable",
    "IncoherentBasis",
    "KrausChannel",
    "MeasurementChannel",
    "PauliChannel",
    "PauliString",
    "StabilizerCode",
    "build_table",
    "certify_gauge_equivalence",
    "channel_from_spec",
    "coherence_invariance_check",
    "gauge_decode",
    "get_code",
    "kl_gram",
    "l1_coherence",
    "logical_basis",
    "logical_state",
    "negativity",
    "physical_pauli_basis",
    "recover",
]
