"""cimp: a compiler toolchain for the imp teaching language.

Subpackages and modules:

* ``syntax``: the shared AST (expressions, commands, assertions).
* ``frontend``: lexer, recursive-descent parser, pretty printer.
* ``semantics``: fueled big-step and small-step reference interpreters.
* ``stack_machine``: stack-code compiler and fueled virtual machine.
* ``hoare``: weakest liberal preconditions, verification conditions,
  SMT-LIB export, and a bounded-model validity check.
* ``regalloc``: optimal register allocation for expression trees.
* ``optimizer``: AST-level rewrites behind -O levels.
* ``typecheck``: the fixed-width (i32/u32) type system and wrapping
  evaluator.
* ``mips``: MIPS-subset code generation, assembly text round-trip, and
  an instruction-level simulator.
* ``generator`` / ``difftest``: deterministic program generation and
  the differential-testing harness.
* ``cli``: the ``cimp`` command-line driver.
"""

from . import syntax
from .errors import CimpError

__version__ = "0.1.0"

__all__ = ["syntax", "CimpError", "__version__"]
