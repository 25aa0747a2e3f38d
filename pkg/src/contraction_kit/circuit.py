"""Arithmetic circuits over exact rationals.

A circuit is a DAG of gates from {add, sub, mul, max, min, gt, const} plus
declared input nodes.  Gates are total over the rationals; ``gt`` outputs 1
if its left argument is strictly greater than its right argument and 0
otherwise.  Evaluation is exact (``fractions.Fraction`` end to end), pure,
and deterministic, so circuits can back strict-inequality verifiers with no
tolerance ambiguity.

Text format (UTF-8, one node per line, ``#`` starts a comment):

    input <id>                      declares node <id> as the next input
    n<id>: const <num>/<den>        rational constant
    n<id>: <op> n<i> n<j>           op in {add, sub, mul, max, min, gt}
    outputs: n<i> [n<j> ...]        final line, names the output nodes

Node references may only point at previously declared nodes, which makes
cycles unrepresentable; a reference to a later node is rejected as a
forward reference.  Inputs bind positionally in declaration order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

BINARY_OPS = ("add", "sub", "mul", "max", "min", "gt")
GATE_KINDS = BINARY_OPS + ("const", "input")

_OP_FUNCS: dict[str, Callable[[Fraction, Fraction], Fraction]] = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "max": lambda a, b: a if a >= b else b,
    "min": lambda a, b: a if a <= b else b,
    "gt": lambda a, b: Fraction(1) if a > b else Fraction(0),
}


class CircuitError(ValueError):
    """Structural problem in a circuit (bad reference, arity, ...)."""


class CircuitParseError(CircuitError):
    """Parse failure; carries the 1-based offending line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def parse_fraction(text: str) -> Fraction:
    """Parse ``a/b`` or ``a`` with integer parts into an exact rational."""
    text = text.strip()
    if "/" in text:
        num, _, den = text.partition("/")
        return Fraction(int(num), int(den))
    return Fraction(int(text))


def format_fraction(q: Fraction) -> str:
    """Render a rational as ``num/den`` (integers as ``num/1``-free form)."""
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Gate:
    """One circuit node: an operation, a constant, or a declared input."""

    kind: str
    args: tuple[int, ...] = ()
    value: Fraction | None = None       # const only
    input_index: int | None = None      # input only

    def __post_init__(self) -> None:
        if self.kind not in GATE_KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        if self.kind in BINARY_OPS and len(self.args) != 2:
            raise CircuitError(f"{self.kind} gate takes exactly two inputs")
        if self.kind in ("const", "input") and self.args:
            raise CircuitError(f"{self.kind} gate takes no inputs")
        if self.kind == "const" and self.value is None:
            raise CircuitError("const gate needs a rational value")


class Circuit:
    """Immutable gate list in topological order plus designated outputs."""

    def __init__(self, gates: dict[int, Gate], order: Sequence[int], outputs: Sequence[int]):
        self._gates = dict(gates)
        self._order = list(order)
        self.outputs = list(outputs)
        self._inputs = [i for i in self._order if self._gates[i].kind == "input"]
        self._validate()

    def _validate(self) -> None:
        seen: set[int] = set()
        for node_id in self._order:
            gate = self._gates[node_id]
            for ref in gate.args:
                if ref not in self._gates:
                    raise CircuitError(f"dangling node id n{ref}")
                if ref not in seen:
                    raise CircuitError(f"forward reference to n{ref} from n{node_id}")
            seen.add(node_id)
        for out in self.outputs:
            if out not in self._gates:
                raise CircuitError(f"dangling output id n{out}")
        if not self.outputs:
            raise CircuitError("circuit declares no outputs")

    @property
    def input_arity(self) -> int:
        return len(self._inputs)

    @property
    def output_arity(self) -> int:
        return len(self.outputs)

    @property
    def gate_count(self) -> int:
        return len(self._order)

    def nodes(self) -> Iterable[tuple[int, Gate]]:
        for node_id in self._order:
            yield node_id, self._gates[node_id]

    def evaluate(self, inputs: Sequence[Fraction]) -> list[Fraction]:
        """Exactly evaluate the circuit on rational inputs."""
        if len(inputs) != self.input_arity:
            raise CircuitError(
                f"arity mismatch: circuit takes {self.input_arity} inputs, got {len(inputs)}"
            )
        values: dict[int, Fraction] = {}
        for node_id in self._order:
            gate = self._gates[node_id]
            if gate.kind == "input":
                values[node_id] = Fraction(inputs[gate.input_index])
            elif gate.kind == "const":
                values[node_id] = gate.value
            else:
                values[node_id] = _OP_FUNCS[gate.kind](values[gate.args[0]], values[gate.args[1]])
        return [values[out] for out in self.outputs]

    def evaluate1(self, inputs: Sequence[Fraction]) -> Fraction:
        """Evaluate a single-output circuit and return the scalar."""
        out = self.evaluate(inputs)
        if len(out) != 1:
            raise CircuitError(f"expected one output, circuit has {len(out)}")
        return out[0]

    def to_text(self) -> str:
        lines = []
        for node_id in self._order:
            gate = self._gates[node_id]
            if gate.kind == "input":
                lines.append(f"input {node_id}")
            elif gate.kind == "const":
                lines.append(f"n{node_id}: const {format_fraction(gate.value)}")
            else:
                lines.append(f"n{node_id}: {gate.kind} n{gate.args[0]} n{gate.args[1]}")
        lines.append("outputs: " + " ".join(f"n{i}" for i in self.outputs))
        return "\n".join(lines) + "\n"


def _parse_node_ref(token: str, line_no: int) -> int:
    if not token.startswith("n") or not token[1:].isdigit():
        raise CircuitParseError(line_no, f"bad node reference {token!r}")
    return int(token[1:])


def parse_circuit(text: str) -> Circuit:
    """Parse the textual circuit format; raises CircuitParseError with line info."""
    gates: dict[int, Gate] = {}
    order: list[int] = []
    outputs: list[int] | None = None
    n_inputs = 0
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if outputs is not None:
            raise CircuitParseError(line_no, "content after outputs line")
        if line.startswith("input"):
            token = line[len("input"):].strip()
            if not token.isdigit():
                raise CircuitParseError(line_no, f"bad input declaration {line!r}")
            node_id = int(token)
            if node_id in gates:
                raise CircuitParseError(line_no, f"duplicate node id n{node_id}")
            gates[node_id] = Gate("input", input_index=n_inputs)
            order.append(node_id)
            n_inputs += 1
            continue
        if line.startswith("outputs:"):
            refs = line[len("outputs:"):].split()
            if not refs:
                raise CircuitParseError(line_no, "empty outputs line")
            out_ids = []
            for token in refs:
                ref = _parse_node_ref(token, line_no)
                if ref not in gates:
                    raise CircuitParseError(line_no, f"dangling node id n{ref}")
                out_ids.append(ref)
            outputs = out_ids
            continue
        head, _, rest = line.partition(":")
        if not rest:
            raise CircuitParseError(line_no, f"unparseable line {line!r}")
        node_id = _parse_node_ref(head.strip(), line_no)
        if node_id in gates:
            raise CircuitParseError(line_no, f"duplicate node id n{node_id}")
        parts = rest.split()
        op = parts[0]
        if op == "const":
            if len(parts) != 2:
                raise CircuitParseError(line_no, "const takes exactly one rational")
            try:
                value = parse_fraction(parts[1])
            except (ValueError, ZeroDivisionError) as exc:
                raise CircuitParseError(line_no, f"bad rational {parts[1]!r}: {exc}") from exc
            gates[node_id] = Gate("const", value=value)
        elif op in BINARY_OPS:
            if len(parts) != 3:
                raise CircuitParseError(line_no, f"{op} takes exactly two node references")
            a = _parse_node_ref(parts[1], line_no)
            b = _parse_node_ref(parts[2], line_no)
            for ref in (a, b):
                if ref not in gates:
                    if ref == node_id:
                        raise CircuitParseError(line_no, f"cycle detected: n{node_id} references itself")
                    raise CircuitParseError(line_no, f"forward reference to n{ref}")
            gates[node_id] = Gate(op, (a, b))
        else:
            raise CircuitParseError(line_no, f"unknown gate {op!r}")
        order.append(node_id)
    if outputs is None:
        raise CircuitParseError(len(text.splitlines()) or 1, "missing outputs line")
    return Circuit(gates, order, outputs)


class CircuitBuilder:
    """Programmatic circuit construction with fresh sequential node ids."""

    def __init__(self) -> None:
        self._gates: dict[int, Gate] = {}
        self._order: list[int] = []
        self._n_inputs = 0
        self._const_cache: dict[Fraction, int] = {}

    def _push(self, gate: Gate) -> int:
        node_id = len(self._order)
        self._gates[node_id] = gate
        self._order.append(node_id)
        return node_id

    def input(self) -> int:
        node_id = self._push(Gate("input", input_index=self._n_inputs))
        self._n_inputs += 1
        return node_id

    def inputs(self, count: int) -> list[int]:
        return [self.input() for _ in range(count)]

    def const(self, value) -> int:
        q = Fraction(value)
        if q not in self._const_cache:
            self._const_cache[q] = self._push(Gate("const", value=q))
        return self._const_cache[q]

    def op(self, kind: str, a: int, b: int) -> int:
        return self._push(Gate(kind, (a, b)))

    def add(self, a: int, b: int) -> int:
        return self.op("add", a, b)

    def sub(self, a: int, b: int) -> int:
        return self.op("sub", a, b)

    def mul(self, a: int, b: int) -> int:
        return self.op("mul", a, b)

    def max(self, a: int, b: int) -> int:
        return self.op("max", a, b)

    def min(self, a: int, b: int) -> int:
        return self.op("min", a, b)

    def gt(self, a: int, b: int) -> int:
        return self.op("gt", a, b)

    def neg(self, a: int) -> int:
        return self.sub(self.const(0), a)

    def abs(self, a: int, b: int) -> int:
        """|a - b| as max(a-b, b-a)."""
        return self.max(self.sub(a, b), self.sub(b, a))

    def sum(self, ids: Sequence[int]) -> int:
        if not ids:
            return self.const(0)
        acc = ids[0]
        for node in ids[1:]:
            acc = self.add(acc, node)
        return acc

    def inline(self, circuit: Circuit, args: Sequence[int]) -> list[int]:
        """Splice another circuit in, wiring its inputs to existing nodes."""
        if len(args) != circuit.input_arity:
            raise CircuitError(
                f"inline arity mismatch: circuit takes {circuit.input_arity}, got {len(args)}"
            )
        mapping: dict[int, int] = {}
        for node_id, gate in circuit.nodes():
            if gate.kind == "input":
                mapping[node_id] = args[gate.input_index]
            elif gate.kind == "const":
                mapping[node_id] = self.const(gate.value)
            else:
                mapping[node_id] = self.op(gate.kind, mapping[gate.args[0]], mapping[gate.args[1]])
        return [mapping[out] for out in circuit.outputs]

    def build(self, outputs: Sequence[int]) -> Circuit:
        return Circuit(self._gates, self._order, outputs)


def build_power_circuit(c: Fraction, max_exponent: int) -> Circuit:
    """Circuit computing c**e for integer inputs e in [0, max_exponent].

    The exponent arrives as a rational-encoded integer; its binary digits are
    peeled off with gt/sub gates against descending powers of two, and the
    matching repeated squarings of c are multiplied together.  Gate count is
    O(log max_exponent).
    """
    c = Fraction(c)
    if not 0 < c < 1:
        raise CircuitError(f"c must lie in (0,1), got {format_fraction(c)}")
    if max_exponent < 1:
        raise CircuitError("max_exponent must be at least 1")
    b = CircuitBuilder()
    e = b.input()
    one = b.const(1)
    n_bits = max_exponent.bit_length()
    # squares[j] = c**(2**j), built in-circuit by repeated squaring
    squares = [b.const(c)]
    for _ in range(1, n_bits):
        squares.append(b.mul(squares[-1], squares[-1]))
    remainder = e
    acc = one
    for j in range(n_bits - 1, -1, -1):
        threshold = b.const(2 ** j)
        bit = b.sub(one, b.gt(threshold, remainder))  # 1 iff remainder >= 2**j
        remainder = b.sub(remainder, b.mul(bit, threshold))
        factor = b.add(b.mul(bit, squares[j]), b.sub(one, bit))
        acc = b.mul(acc, factor)
    return b.build([acc])
