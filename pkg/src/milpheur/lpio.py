"""Reading and writing MILP instances: a CPLEX-style LP subset and JSON.

Supported LP sections: objective (Minimize/Maximize), Subject To, Bounds,
Generals, Binaries, SOS (type 1 only), End. No quadratic terms, no ranges,
no semi-continuous variables. Maximization is folded into the internal
minimization form at parse time (coefficients and offset negated).

The writer is the exact inverse: ``parse(write(inst))`` is semantically
equal to ``inst`` up to variable ordering. Floats are emitted with repr so
the round trip is bit-exact.
"""

from __future__ import annotations

import json
import re

from .core import (
    BINARY,
    CONTINUOUS,
    EQ,
    GE,
    INF,
    INTEGER,
    LE,
    LinearConstraint,
    MilpError,
    MilpInstance,
    VariableDef,
)


class LpSyntaxError(MilpError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


_TOKEN_RE = re.compile(
    r"""(?P<ws>[ \t\r]+)
      | (?P<comment>\\.*)
      | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
      | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
      | (?P<op><=|>=|=<|=>|::|[<>=+\-:])
    """,
    re.VERBOSE,
)

_SENSE_WORDS = {
    "minimize": 1, "minimise": 1, "min": 1,
    "maximize": -1, "maximise": -1, "max": -1,
}
_SECTION_WORDS = {
    "subject", "such", "st", "bounds", "bound",
    "generals", "general", "gen", "integers", "integer",
    "binaries", "binary", "bin", "sos", "end",
}
_INF_WORDS = {"inf", "infinity"}


class _Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        pos = 0
        while pos < len(line):
            m = _TOKEN_RE.match(line, pos)
            if m is None:
                raise LpSyntaxError(f"unexpected character {line[pos]!r}", lineno, pos + 1)
            pos = m.end()
            if m.lastgroup in ("ws", "comment"):
                continue
            kind = m.lastgroup
            text_ = m.group()
            if kind == "op" and text_ in ("=<", "=>", "<", ">"):
                text_ = {"=<": "<=", "=>": ">=", "<": "<=", ">": ">="}[text_]
            tokens.append(_Token(kind, text_, lineno, m.start() + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.var_index: dict[str, int] = {}
        self.var_names: list[str] = []
        self.lo: dict[int, float] = {}
        self.hi: dict[int, float] = {}
        self.lo_set: set[int] = set()
        self.hi_set: set[int] = set()
        self.integrality: dict[int, str] = {}
        self.constraints: list[LinearConstraint] = []
        self.obj_terms: dict[int, float] = {}
        self.offset = 0.0
        self.obj_sign = 1

    # -- token helpers ----------------------------------------------------
    def peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> _Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else _Token("", "", 1, 1)
            raise LpSyntaxError("unexpected end of file", last.line, last.col)
        self.pos += 1
        return tok

    def fail(self, msg: str, tok: _Token | None = None):
        tok = tok or self.peek() or (self.tokens[-1] if self.tokens else _Token("", "", 1, 1))
        raise LpSyntaxError(msg, tok.line, tok.col)

    def at_section_word(self) -> str | None:
        tok = self.peek()
        if tok is not None and tok.kind == "name" and tok.text.lower() in _SECTION_WORDS:
            return tok.text.lower()
        return None

    def var(self, name: str) -> int:
        if name not in self.var_index:
            self.var_index[name] = len(self.var_names)
            self.var_names.append(name)
        return self.var_index[name]

    # -- grammar ----------------------------------------------------------
    def parse(self, name: str) -> MilpInstance:
        tok = self.next()
        if tok.kind != "name" or tok.text.lower() not in _SENSE_WORDS:
            self.fail("expected Minimize or Maximize", tok)
        self.obj_sign = _SENSE_WORDS[tok.text.lower()]
        self.parse_objective()
        while self.peek() is not None:
            word = self.at_section_word()
            if word is None:
                self.fail(f"unknown section starting at {self.peek().text!r}")
            if word in ("subject", "such"):
                self.next()
                follow = self.next()
                if follow.kind != "name" or follow.text.lower() not in ("to", "that"):
                    self.fail("expected 'to' after section keyword", follow)
                self.parse_constraints()
            elif word == "st":
                self.next()
                self.parse_constraints()
            elif word in ("bounds", "bound"):
                self.next()
                self.parse_bounds()
            elif word in ("generals", "general", "gen", "integers", "integer"):
                self.next()
                self.parse_integrality(INTEGER)
            elif word in ("binaries", "binary", "bin"):
                self.next()
                self.parse_integrality(BINARY)
            elif word == "sos":
                self.next()
                self.parse_sos()
            elif word == "end":
                self.next()
                break
        return self.build(name)

    def parse_objective(self):
        tok = self.peek()
        if (
            tok is not None and tok.kind == "name"
            and tok.text.lower() not in _SECTION_WORDS
            and self.pos + 1 < len(self.tokens)
            and self.tokens[self.pos + 1].text == ":"
        ):
            self.pos += 2  # objective label, unused
        terms, const = self.parse_linexpr()
        for i, c in terms:
            self.obj_terms[i] = self.obj_terms.get(i, 0.0) + self.obj_sign * c
        self.offset += self.obj_sign * const

    def parse_linexpr(self) -> tuple[list[tuple[int, float]], float]:
        """Terms until a relational operator or section keyword."""
        terms: list[tuple[int, float]] = []
        const = 0.0
        first = True
        while True:
            tok = self.peek()
            if tok is None or tok.text in ("<=", ">=", "=") or self.at_section_word():
                if first:
                    self.fail("empty expression", tok)
                return terms, const
            sign = 1.0
            if tok.text in ("+", "-"):
                sign = -1.0 if tok.text == "-" else 1.0
                self.next()
                tok = self.peek()
            elif not first:
                self.fail(f"expected '+' or '-' before {tok.text!r}", tok)
            first = False
            if tok is None or self.at_section_word():
                self.fail("dangling sign")
            if tok.kind == "num":
                coef = sign * float(self.next().text)
                nxt = self.peek()
                if nxt is not None and nxt.kind == "name" and not self.at_section_word():
                    terms.append((self.var(self.next().text), coef))
                else:
                    const += coef
            elif tok.kind == "name" and tok.text.lower() in _INF_WORDS:
                self.fail("infinity not allowed in expressions", tok)
            elif tok.kind == "name":
                terms.append((self.var(self.next().text), sign))
            else:
                self.fail(f"expected term, got {tok.text!r}", tok)

    def parse_constraints(self):
        while True:
            tok = self.peek()
            if tok is None or self.at_section_word():
                return
            name = None
            if (
                tok.kind == "name"
                and self.pos + 1 < len(self.tokens)
                and self.tokens[self.pos + 1].text == ":"
            ):
                name = tok.text
                self.pos += 2
            terms, const = self.parse_linexpr()
            op = self.next()
            if op.text not in ("<=", ">=", "="):
                self.fail(f"expected constraint sense, got {op.text!r}", op)
            rhs = self.parse_signed_number()
            if name is None:
                name = self.fresh_constraint_name()
            merged: dict[int, float] = {}
            for i, c in terms:
                merged[i] = merged.get(i, 0.0) + c
            self.constraints.append(
                LinearConstraint(
                    name=name,
                    terms=tuple(merged.items()),
                    sense={"<=": LE, ">=": GE, "=": EQ}[op.text],
                    rhs=rhs - const,
                )
            )

    def fresh_constraint_name(self) -> str:
        taken = {c.name for c in self.constraints}
        i = len(self.constraints) + 1
        while f"c{i}" in taken:
            i += 1
        return f"c{i}"

    def parse_signed_number(self) -> float:
        sign = 1.0
        tok = self.next()
        if tok.text in ("+", "-"):
            sign = -1.0 if tok.text == "-" else 1.0
            tok = self.next()
        if tok.kind == "name" and tok.text.lower() in _INF_WORDS:
            return sign * INF
        if tok.kind != "num":
            self.fail(f"expected number, got {tok.text!r}", tok)
        return sign * float(tok.text)

    def set_bound(self, idx: int, side: str, value: float, tok: _Token):
        store, seen = (self.lo, self.lo_set) if side == "lo" else (self.hi, self.hi_set)
        if idx in seen:
            self.fail(f"duplicate {side} bound for {self.var_names[idx]!r}", tok)
        seen.add(idx)
        store[idx] = value

    def parse_bounds(self):
        while True:
            tok = self.peek()
            if tok is None or self.at_section_word():
                return
            if tok.kind == "name" and tok.text.lower() not in _INF_WORDS:
                idx = self.var(self.next().text)
                nxt = self.peek()
                if nxt is not None and nxt.kind == "name" and nxt.text.lower() == "free":
                    self.next()
                    self.set_bound(idx, "lo", -INF, tok)
                    self.set_bound(idx, "hi", INF, tok)
                    continue
                op = self.next()
                val = self.parse_signed_number()
                if op.text == "<=":
                    self.set_bound(idx, "hi", val, op)
                elif op.text == ">=":
                    self.set_bound(idx, "lo", val, op)
                elif op.text == "=":
                    self.set_bound(idx, "lo", val, op)
                    self.set_bound(idx, "hi", val, op)
                else:
                    self.fail(f"bad bound operator {op.text!r}", op)
            else:
                val = self.parse_signed_number()
                op = self.next()
                if op.text not in ("<=", ">="):
                    self.fail(f"bad bound operator {op.text!r}", op)
                name_tok = self.next()
                if name_tok.kind != "name":
                    self.fail(f"expected variable name, got {name_tok.text!r}", name_tok)
                idx = self.var(name_tok.text)
                self.set_bound(idx, "lo" if op.text == "<=" else "hi", val, op)
                nxt = self.peek()
                if nxt is not None and nxt.text in ("<=", ">="):
                    op2 = self.next()
                    val2 = self.parse_signed_number()
                    self.set_bound(idx, "hi" if op2.text == "<=" else "lo", val2, op2)

    def parse_integrality(self, kind: str):
        while True:
            tok = self.peek()
            if tok is None or self.at_section_word():
                return
            if tok.kind != "name":
                self.fail(f"expected variable name, got {tok.text!r}", tok)
            self.integrality[self.var(self.next().text)] = kind

    def _starts_new_sos_set(self) -> bool:
        """True if the upcoming tokens open another SOS declaration."""
        tok = self.peek()
        if tok is None or tok.kind != "name":
            return False
        # "label : S1" (member entries are "name : number" instead)
        if (
            self.pos + 2 < len(self.tokens)
            and self.tokens[self.pos + 1].text == ":"
            and self.tokens[self.pos + 2].kind == "name"
            and self.tokens[self.pos + 2].text.upper() in ("S1", "S2")
        ):
            return True
        return (
            tok.text.upper() in ("S1", "S2")
            and self.pos + 1 < len(self.tokens)
            and self.tokens[self.pos + 1].text == "::"
        )

    def parse_sos(self):
        while True:
            tok = self.peek()
            if tok is None or self.at_section_word():
                return
            name = None
            if (
                tok.kind == "name"
                and self.pos + 2 < len(self.tokens)
                and self.tokens[self.pos + 1].text == ":"
                and self.tokens[self.pos + 2].kind == "name"
                and self.tokens[self.pos + 2].text.upper() in ("S1", "S2")
            ):
                name = tok.text
                self.pos += 2
                tok = self.peek()
            if tok is None or tok.kind != "name" or tok.text.upper() not in ("S1", "S2"):
                self.fail("expected SOS type marker S1", tok)
            if tok.text.upper() == "S2":
                self.fail("SOS2 sets are not supported", tok)
            self.next()
            sep = self.next()
            if sep.text != "::":
                self.fail(f"expected '::' after S1, got {sep.text!r}", sep)
            members: list[tuple[int, float]] = []
            while True:
                tok = self.peek()
                if tok is None or tok.kind != "name" or self.at_section_word():
                    break
                if self._starts_new_sos_set():
                    break
                var_tok = self.next()
                colon = self.next()
                if colon.text != ":":
                    self.fail(f"expected ':' in SOS member, got {colon.text!r}", colon)
                weight_tok = self.next()
                if weight_tok.kind != "num":
                    self.fail(f"expected SOS weight, got {weight_tok.text!r}", weight_tok)
                members.append((self.var(var_tok.text), float(weight_tok.text)))
            if not members:
                self.fail("empty SOS set")
            if name is None:
                name = f"sos{sum(1 for c in self.constraints if c.is_sos1) + 1}"
            self.constraints.append(
                LinearConstraint(name=name, terms=tuple(members), sense=LE, rhs=0.0, sos1_group=name)
            )

    def build(self, name: str) -> MilpInstance:
        variables = []
        for i, vname in enumerate(self.var_names):
            kind = self.integrality.get(i, CONTINUOUS)
            if kind == BINARY:
                lo = self.lo.get(i, 0.0)
                hi = self.hi.get(i, 1.0)
            else:
                lo = self.lo.get(i, 0.0)
                hi = self.hi.get(i, INF)
            variables.append(VariableDef(name=vname, lower=lo, upper=hi, integrality=kind))
        return MilpInstance(
            name=name,
            variables=tuple(variables),
            constraints=tuple(self.constraints),
            objective=tuple(self.obj_terms.items()),
            offset=self.offset,
        )


def parse_lp_file(text, name: str = "instance") -> MilpInstance:
    """Parse LP-format text (str or UTF-8 bytes) into an instance."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    return _Parser(text).parse(name)


def read_lp_file(path) -> MilpInstance:
    with open(path, "rb") as fh:
        data = fh.read()
    import os

    stem = os.path.splitext(os.path.basename(str(path)))[0]
    return parse_lp_file(data, name=stem)


# -- writer ----------------------------------------------------------------


def _fmt(value: float) -> str:
    if value == INF:
        return "+inf"
    if value == -INF:
        return "-inf"
    if float(value).is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(float(value))


def write_lp_file(inst: MilpInstance) -> str:
    """Serialize an instance to LP-format text (UTF-8 friendly)."""
    lines = [f"\\ {inst.name}", "Minimize"]
    obj = " obj:"
    wrote = False
    for idx, coef in inst.objective:
        if coef == 0.0:
            continue
        sign = "-" if coef < 0 else "+"
        obj += f" {sign} {_fmt(abs(coef))} {inst.variables[idx].name}"
        wrote = True
    if inst.offset != 0.0 or not wrote:
        sign = "-" if inst.offset < 0 else "+"
        obj += f" {sign} {_fmt(abs(inst.offset))}"
    lines.append(obj)
    lines.append("Subject To")
    for con in inst.constraints:
        if con.is_sos1:
            continue
        body = ""
        for idx, coef in con.terms:
            sign = "-" if coef < 0 else "+"
            body += f" {sign} {_fmt(abs(coef))} {inst.variables[idx].name}"
        if not body:
            body = " + 0"
        lines.append(f" {con.name}:{body} {con.sense} {_fmt(con.rhs)}")
    bound_lines = []
    for var in inst.variables:
        default_hi = 1.0 if var.integrality == BINARY else INF
        if var.lower == 0.0 and var.upper == default_hi:
            continue
        bound_lines.append(f" {_fmt(var.lower)} <= {var.name} <= {_fmt(var.upper)}")
    if bound_lines:
        lines.append("Bounds")
        lines.extend(bound_lines)
    generals = [v.name for v in inst.variables if v.integrality == INTEGER]
    if generals:
        lines.append("Generals")
        lines.append(" " + " ".join(generals))
    binaries = [v.name for v in inst.variables if v.integrality == BINARY]
    if binaries:
        lines.append("Binaries")
        lines.append(" " + " ".join(binaries))
    sos = [c for c in inst.constraints if c.is_sos1]
    if sos:
        lines.append("SOS")
        for con in sos:
            members = " ".join(f"{inst.variables[i].name}:{_fmt(w)}" for i, w in con.terms)
            lines.append(f" {con.name}: S1:: {members}")
    lines.append("End")
    return "\n".join(lines) + "\n"


# -- JSON round trip --------------------------------------------------------


def instance_to_json_dict(inst: MilpInstance) -> dict:
    return {
        "name": inst.name,
        "variables": [
            {
                "name": v.name,
                "lower": None if v.lower == -INF else v.lower,
                "upper": None if v.upper == INF else v.upper,
                "integrality": v.integrality,
            }
            for v in inst.variables
        ],
        "constraints": [
            {
                "name": c.name,
                "terms": [[i, coef] for i, coef in c.terms],
                "sense": c.sense,
                "rhs": c.rhs,
                "sos1_group": c.sos1_group,
            }
            for c in inst.constraints
        ],
        "objective": {"terms": [[i, coef] for i, coef in inst.objective], "offset": inst.offset},
    }


def instance_from_json_dict(data: dict) -> MilpInstance:
    variables = tuple(
        VariableDef(
            name=v["name"],
            lower=-INF if v["lower"] is None else float(v["lower"]),
            upper=INF if v["upper"] is None else float(v["upper"]),
            integrality=v["integrality"],
        )
        for v in data["variables"]
    )
    constraints = tuple(
        LinearConstraint(
            name=c["name"],
            terms=tuple((int(i), float(coef)) for i, coef in c["terms"]),
            sense=c["sense"],
            rhs=float(c["rhs"]),
            sos1_group=c.get("sos1_group"),
        )
        for c in data["constraints"]
    )
    return MilpInstance(
        name=data["name"],
        variables=variables,
        constraints=constraints,
        objective=tuple((int(i), float(coef)) for i, coef in data["objective"]["terms"]),
        offset=float(data["objective"]["offset"]),
    )


def write_json_file(inst: MilpInstance) -> str:
    return json.dumps(instance_to_json_dict(inst), indent=1)


def parse_json_file(text) -> MilpInstance:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    return instance_from_json_dict(json.loads(text))
