"""Dynamic cellular automata compiled from ASM-lite programs."""

from ._dynca import (  # noqa: F401
    DyncaError,
    ParseError,
    compile,
    difftest,
    interpret,
    parse_value,
    simulate,
)
