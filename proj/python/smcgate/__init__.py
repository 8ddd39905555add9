"""Privacy-preserving IoT aggregation over additive secret sharing.

The heavy lifting lives in the C++ core; this package re-exports the
bindings: prime-field arithmetic, fixed-point encoding, additive sharing,
and the scenario runner with its built-in privacy checks.
"""

from smcgate._core import (
    Field,
    FieldElement,
    FixedPointCodec,
    Mt19937Random,
    RandomSource,
    ScriptedRandom,
    SmcgateError,
    decode_fixed,
    encode_fixed,
    reconstruct_additive,
    run_scenario,
    run_scenario_file,
    share_additive,
    verify_transcript,
)

__all__ = [
    "Field",
    "FieldElement",
    "FixedPointCodec",
    "Mt19937Random",
    "RandomSource",
    "ScriptedRandom",
    "SmcgateError",
    "decode_fixed",
    "encode_fixed",
    "reconstruct_additive",
    "run_scenario",
    "run_scenario_file",
    "share_additive",
    "verify_transcript",
]
