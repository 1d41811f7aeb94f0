"""OpenQASM 2.0 frontend for a fixed gate subset.

Supported productions (see docs/qasm_grammar.md for the full list):
header, include, qreg/creg declarations, gate macro definitions whose
bodies reduce to supported primitives, gate applications with register
broadcast, barrier and measure. Classical control flow, opaque gates and
reset are rejected.
"""
from __future__ import annotations

import math
import re

from .circuit import Circuit, GateKind, Instruction

_PRIMITIVES = {
    "h": GateKind.H,
    "x": GateKind.X,
    "y": GateKind.Y,
    "z": GateKind.Z,
    "s": GateKind.S,
    "sdg": GateKind.SDG,
    "t": GateKind.T,
    "tdg": GateKind.TDG,
    "rx": GateKind.RX,
    "ry": GateKind.RY,
    "rz": GateKind.RZ,
    "u1": GateKind.U1,
    "u2": GateKind.U2,
    "u3": GateKind.U3,
    "u": GateKind.U3,
    "U": GateKind.U3,
    "cx": GateKind.CX,
    "CX": GateKind.CX,
    "cz": GateKind.CZ,
    "swap": GateKind.SWAP,
    "ccx": GateKind.CCX,
}

_FUNCTIONS = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "ln": math.log,
    "sqrt": math.sqrt,
}

_MAX_EXPANSION_DEPTH = 32


class QasmError(ValueError):
    pass


class QasmSyntaxError(QasmError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnsupportedGateError(QasmError):
    pass


class QasmIndexError(QasmError, IndexError):
    pass


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*)
  | (?P<number>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"[^"\n]*")
  | (?P<arrow>->)
  | (?P<sym>[;,(){}\[\]+\-*/^=])
""",
    re.VERBOSE,
)


class _Token:
    __slots__ = ("kind", "text", "line")

    def __init__(self, kind, text, line):
        self.kind, self.text, self.line = kind, text, line

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, line {self.line})"


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    line = 1
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise QasmSyntaxError(f"unexpected character {source[pos]!r}", line)
        line += source[pos : m.end()].count("\n")
        pos = m.end()
        kind = m.lastgroup
        if kind in ("ws", "comment"):
            continue
        tokens.append(_Token(kind, m.group(), line))
    return tokens


class _GateDef:
    __slots__ = ("params", "qargs", "body")

    def __init__(self, params, qargs, body):
        self.params, self.qargs, self.body = params, qargs, body


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0
        self.qregs: dict[str, tuple[int, int]] = {}  # name -> (offset, size)
        self.cregs: dict[str, tuple[int, int]] = {}
        self.gatedefs: dict[str, _GateDef] = {}
        self.instructions: list[Instruction] = []

    # --- token plumbing -------------------------------------------------

    def _peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _next(self) -> _Token:
        tok = self._peek()
        if tok is None:
            last = self.tokens[-1].line if self.tokens else 1
            raise QasmSyntaxError("unexpected end of input", last)
        self.pos += 1
        return tok

    def _expect(self, text: str) -> _Token:
        tok = self._next()
        if tok.text != text:
            raise QasmSyntaxError(f"expected {text!r}, found {tok.text!r}", tok.line)
        return tok

    def _expect_id(self) -> _Token:
        tok = self._next()
        if tok.kind != "id":
            raise QasmSyntaxError(f"expected identifier, found {tok.text!r}", tok.line)
        return tok

    # --- expressions ----------------------------------------------------

    def _parse_expr(self):
        node = self._parse_term()
        while self._peek() is not None and self._peek().text in ("+", "-"):
            op = self._next().text
            node = ("bin", op, node, self._parse_term())
        return node

    def _parse_term(self):
        node = self._parse_factor()
        while self._peek() is not None and self._peek().text in ("*", "/"):
            op = self._next().text
            node = ("bin", op, node, self._parse_factor())
        return node

    def _parse_factor(self):
        tok = self._peek()
        if tok is not None and tok.text == "-":
            self._next()
            return ("neg", self._parse_factor())
        node = self._parse_atom()
        if self._peek() is not None and self._peek().text == "^":
            self._next()
            node = ("bin", "^", node, self._parse_factor())
        return node

    def _parse_atom(self):
        tok = self._next()
        if tok.kind == "number":
            return ("num", float(tok.text))
        if tok.kind == "id":
            if tok.text == "pi":
                return ("num", math.pi)
            if tok.text in _FUNCTIONS:
                self._expect("(")
                inner = self._parse_expr()
                self._expect(")")
                return ("fn", tok.text, inner)
            return ("var", tok.text, tok.line)
        if tok.text == "(":
            inner = self._parse_expr()
            self._expect(")")
            return inner
        raise QasmSyntaxError(f"unexpected token {tok.text!r} in expression", tok.line)

    @staticmethod
    def _eval(node, env: dict[str, float]) -> float:
        tag = node[0]
        if tag == "num":
            return node[1]
        if tag == "var":
            _, name, line = node
            if name not in env:
                raise QasmSyntaxError(f"unknown parameter {name!r}", line)
            return env[name]
        if tag == "neg":
            return -_Parser._eval(node[1], env)
        if tag == "fn":
            return _FUNCTIONS[node[1]](_Parser._eval(node[2], env))
        _, op, left, right = node
        a, b = _Parser._eval(left, env), _Parser._eval(right, env)
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            return a / b
        return a**b

    # --- statements -----------------------------------------------------

    def parse_program(self) -> None:
        tok = self._peek()
        if tok is not None and tok.text == "OPENQASM":
            self._next()
            version = self._next()
            if version.text != "2.0":
                raise QasmSyntaxError(
                    f"unsupported OPENQASM version {version.text}", version.line
                )
            self._expect(";")
        while self._peek() is not None:
            self._parse_statement()

    def _parse_statement(self) -> None:
        tok = self._peek()
        if tok.text == "include":
            self._next()
            name = self._next()
            if name.kind != "string":
                raise QasmSyntaxError("include expects a string", name.line)
            self._expect(";")
            return
        if tok.text in ("qreg", "creg"):
            self._parse_register(tok.text)
            return
        if tok.text == "gate":
            self._parse_gatedef()
            return
        if tok.text == "measure":
            self._parse_measure()
            return
        if tok.text == "barrier":
            self._parse_barrier()
            return
        if tok.text in ("if", "reset", "opaque"):
            raise QasmSyntaxError(f"unsupported statement {tok.text!r}", tok.line)
        if tok.kind == "id":
            self._parse_application()
            return
        raise QasmSyntaxError(f"unexpected token {tok.text!r}", tok.line)

    def _parse_register(self, which: str) -> None:
        self._next()
        name = self._expect_id()
        self._expect("[")
        size_tok = self._next()
        if size_tok.kind != "number" or "." in size_tok.text:
            raise QasmSyntaxError("register size must be an integer", size_tok.line)
        size = int(size_tok.text)
        if size < 1:
            raise QasmSyntaxError("register size must be positive", size_tok.line)
        self._expect("]")
        self._expect(";")
        table = self.qregs if which == "qreg" else self.cregs
        if name.text in self.qregs or name.text in self.cregs:
            raise QasmSyntaxError(f"register {name.text!r} redefined", name.line)
        offset = sum(s for _, s in table.values())
        table[name.text] = (offset, size)

    def _parse_gatedef(self) -> None:
        self._next()
        name = self._expect_id()
        if name.text in self.gatedefs or name.text in _PRIMITIVES:
            raise QasmSyntaxError(f"gate {name.text!r} redefined", name.line)
        params: list[str] = []
        if self._peek() is not None and self._peek().text == "(":
            self._next()
            if self._peek().text != ")":
                params.append(self._expect_id().text)
                while self._peek().text == ",":
                    self._next()
                    params.append(self._expect_id().text)
            self._expect(")")
        qargs = [self._expect_id().text]
        while self._peek() is not None and self._peek().text == ",":
            self._next()
            qargs.append(self._expect_id().text)
        self._expect("{")
        body = []
        while self._peek() is not None and self._peek().text != "}":
            tok = self._peek()
            if tok.text == "barrier":
                self._next()
                while self._peek().text != ";":
                    self._next()
                self._expect(";")
                continue
            body.append(self._parse_body_call(params, qargs))
        self._expect("}")
        self.gatedefs[name.text] = _GateDef(params, qargs, body)

    def _parse_body_call(self, params, qargs):
        name = self._expect_id()
        exprs = []
        if self._peek() is not None and self._peek().text == "(":
            self._next()
            if self._peek().text != ")":
                exprs.append(self._parse_expr())
                while self._peek().text == ",":
                    self._next()
                    exprs.append(self._parse_expr())
            self._expect(")")
        args = [self._expect_id()]
        while self._peek() is not None and self._peek().text == ",":
            self._next()
            args.append(self._expect_id())
        self._expect(";")
        for arg in args:
            if arg.text not in qargs:
                raise QasmSyntaxError(
                    f"unknown qubit argument {arg.text!r} in gate body", arg.line
                )
        if name.text not in _PRIMITIVES and name.text not in self.gatedefs:
            # covers recursion: a gate cannot reference itself or later names
            raise UnsupportedGateError(
                f"line {name.line}: gate body uses unsupported gate {name.text!r}"
            )
        return (name.text, exprs, [a.text for a in args], name.line)

    def _parse_qubit_arg(self):
        """Return (reg_name, index_or_None, line) after validation."""
        name = self._expect_id()
        if name.text not in self.qregs:
            raise QasmSyntaxError(f"unknown quantum register {name.text!r}", name.line)
        index = None
        if self._peek() is not None and self._peek().text == "[":
            self._next()
            idx_tok = self._next()
            if idx_tok.kind != "number" or "." in idx_tok.text:
                raise QasmSyntaxError("index must be an integer", idx_tok.line)
            index = int(idx_tok.text)
            self._expect("]")
            offset, size = self.qregs[name.text]
            if index >= size:
                raise QasmIndexError(
                    f"line {idx_tok.line}: {name.text}[{index}] out of bounds "
                    f"(size {size})"
                )
        return (name.text, index, name.line)

    def _flatten(self, reg: str, index: int) -> int:
        offset, _ = self.qregs[reg]
        return offset + index

    def _broadcast(self, args, line) -> list[list[int]]:
        """Expand register arguments into per-instruction qubit index lists."""
        sizes = {self.qregs[r][1] for r, idx, _ in args if idx is None}
        if not sizes:
            return [[self._flatten(r, idx) for r, idx, _ in args]]
        if len(sizes) > 1:
            raise QasmSyntaxError("mismatched register sizes in broadcast", line)
        width = sizes.pop()
        rows = []
        for i in range(width):
            rows.append(
                [
                    self._flatten(r, idx if idx is not None else i)
                    for r, idx, _ in args
                ]
            )
        return rows

    def _parse_application(self) -> None:
        name = self._expect_id()
        exprs = []
        if self._peek() is not None and self._peek().text == "(":
            self._next()
            if self._peek().text != ")":
                exprs.append(self._parse_expr())
                while self._peek().text == ",":
                    self._next()
                    exprs.append(self._parse_expr())
            self._expect(")")
        args = [self._parse_qubit_arg()]
        while self._peek() is not None and self._peek().text == ",":
            self._next()
            args.append(self._parse_qubit_arg())
        self._expect(";")
        params = [self._eval(e, {}) for e in exprs]
        for qubits in self._broadcast(args, name.line):
            self._emit_call(name.text, params, qubits, name.line, depth=0)

    def _emit_call(self, name, params, qubits, line, depth) -> None:
        if depth > _MAX_EXPANSION_DEPTH:
            raise UnsupportedGateError(f"line {line}: gate expansion too deep")
        if name == "id":
            return
        if name in _PRIMITIVES:
            kind = _PRIMITIVES[name]
            if len(params) != kind.num_params:
                raise QasmSyntaxError(
                    f"{name} expects {kind.num_params} parameter(s)", line
                )
            if len(qubits) != kind.arity:
                raise QasmSyntaxError(
                    f"{name} expects {kind.arity} qubit argument(s)", line
                )
            self.instructions.append(
                Instruction(kind, tuple(qubits), tuple(float(p) for p in params))
            )
            return
        if name not in self.gatedefs:
            raise UnsupportedGateError(f"line {line}: unsupported gate {name!r}")
        gdef = self.gatedefs[name]
        if len(params) != len(gdef.params):
            raise QasmSyntaxError(f"{name} expects {len(gdef.params)} parameter(s)", line)
        if len(qubits) != len(gdef.qargs):
            raise QasmSyntaxError(
                f"{name} expects {len(gdef.qargs)} qubit argument(s)", line
            )
        env = dict(zip(gdef.params, params))
        qmap = dict(zip(gdef.qargs, qubits))
        for sub_name, sub_exprs, sub_args, sub_line in gdef.body:
            sub_params = [self._eval(e, env) for e in sub_exprs]
            sub_qubits = [qmap[a] for a in sub_args]
            self._emit_call(sub_name, sub_params, sub_qubits, sub_line, depth + 1)

    def _parse_barrier(self) -> None:
        line = self._next().line
        args = [self._parse_qubit_arg()]
        while self._peek() is not None and self._peek().text == ",":
            self._next()
            args.append(self._parse_qubit_arg())
        self._expect(";")
        qubits = []
        for reg, idx, _ in args:
            offset, size = self.qregs[reg]
            if idx is None:
                qubits.extend(range(offset, offset + size))
            else:
                qubits.append(offset + idx)
        self.instructions.append(Instruction(GateKind.BARRIER, tuple(qubits)))

    def _parse_measure(self) -> None:
        self._next()
        q_name, q_idx, line = self._parse_qubit_arg()
        arrow = self._next()
        if arrow.text != "->":
            raise QasmSyntaxError("measure expects '->'", arrow.line)
        c_name = self._expect_id()
        if c_name.text not in self.cregs:
            raise QasmSyntaxError(
                f"unknown classical register {c_name.text!r}", c_name.line
            )
        c_idx = None
        if self._peek() is not None and self._peek().text == "[":
            self._next()
            idx_tok = self._next()
            if idx_tok.kind != "number" or "." in idx_tok.text:
                raise QasmSyntaxError("index must be an integer", idx_tok.line)
            c_idx = int(idx_tok.text)
            self._expect("]")
            c_off, c_size = self.cregs[c_name.text]
            if c_idx >= c_size:
                raise QasmIndexError(
                    f"line {idx_tok.line}: {c_name.text}[{c_idx}] out of bounds "
                    f"(size {c_size})"
                )
        self._expect(";")
        q_off, q_size = self.qregs[q_name]
        c_off, c_size = self.cregs[c_name.text]
        if (q_idx is None) != (c_idx is None):
            raise QasmSyntaxError("measure mixes register and single-bit forms", line)
        if q_idx is None:
            if q_size != c_size:
                raise QasmSyntaxError("measure register sizes differ", line)
            for i in range(q_size):
                self.instructions.append(
                    Instruction(GateKind.MEASURE, (q_off + i,), clbit=c_off + i)
                )
        else:
            self.instructions.append(
                Instruction(GateKind.MEASURE, (q_off + q_idx,), clbit=c_off + c_idx)
            )

    def circuit(self, name: str = "") -> Circuit:
        num_qubits = sum(s for _, s in self.qregs.values())
        num_clbits = sum(s for _, s in self.cregs.values())
        if num_qubits == 0:
            raise QasmSyntaxError("no quantum register declared", 1)
        return Circuit(num_qubits, num_clbits, tuple(self.instructions), name)


def parse_qasm(source: str, name: str = "") -> Circuit:
    """Parse OpenQASM 2.0 text (supported subset) into a Circuit."""
    parser = _Parser(_tokenize(source))
    parser.parse_program()
    return parser.circuit(name)


def circuit_to_qasm(circuit: Circuit) -> str:
    """Serialize a Circuit back to OpenQASM 2.0 text (round-trip safe)."""
    lines = [
        "OPENQASM 2.0;",
        'include "qelib1.inc";',
        f"qreg q[{circuit.num_qubits}];",
    ]
    if circuit.num_clbits:
        lines.append(f"creg c[{circuit.num_clbits}];")
    for instr in circuit.instructions:
        if instr.kind is GateKind.MEASURE:
            lines.append(f"measure q[{instr.qubits[0]}] -> c[{instr.clbit}];")
        elif instr.kind is GateKind.BARRIER:
            args = ",".join(f"q[{q}]" for q in instr.qubits)
            lines.append(f"barrier {args};")
        else:
            gate = instr.kind.value
            params = f"({','.join(repr(p) for p in instr.params)})" if instr.params else ""
            args = ",".join(f"q[{q}]" for q in instr.qubits)
            lines.append(f"{gate}{params} {args};")
    return "\n".join(lines) + "\n"
