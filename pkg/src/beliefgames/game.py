"""Game data model: finite repeated games with exact rational probabilities.

Everything in this module is an immutable value object.  Probabilities and
payoffs are `fractions.Fraction` end to end; equality of beliefs and laws is
decidable syntactic equality after canonicalization (sorted atoms, reduced
fractions, merged duplicates).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

Label = Hashable

ZERO = Fraction(0)
ONE = Fraction(1)


class SpecError(ValueError):
    """Raised for malformed spec files or violated type invariants."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def parse_fraction(text: str, line: int | None = None) -> Fraction:
    """Parse an exact rational literal `a/b` or integer `a`."""
    text = text.strip()
    try:
        if "/" in text:
            num, den = text.split("/")
            return Fraction(int(num), int(den))
        return Fraction(int(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise SpecError(f"bad rational literal {text!r}: {exc}", line) from None


def label_text(label: Label) -> str:
    """Deterministic text rendering of a signal label.

    Plain string labels render as themselves; structured labels (used by the
    canonical-game construction, where signals are beliefs) render through
    their canonical text form.
    """
    if isinstance(label, str):
        return label
    if isinstance(label, (BeliefPoint, BeliefAtomLaw)):
        return label.text()
    if isinstance(label, tuple):
        return "(" + ",".join(label_text(x) for x in label) + ")"
    return repr(label)


def _check_distribution(pairs: Iterable[tuple[Hashable, Fraction]], what: str) -> None:
    total = ZERO
    for key, mass in pairs:
        if mass <= 0:
            raise SpecError(f"{what}: nonpositive mass {mass} at {key}")
        total += mass
    if total != 1:
        raise SpecError(f"{what}: masses sum to {total}, expected 1")


@dataclass(frozen=True)
class BeliefPoint:
    """A first-order belief: an exact probability vector over the states."""

    states: tuple[str, ...]
    probs: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.states) != len(self.probs):
            raise SpecError("belief dimension mismatch")
        if any(p < 0 for p in self.probs):
            raise SpecError(f"negative belief entry in {self.probs}")
        if sum(self.probs, ZERO) != 1:
            raise SpecError(f"belief entries sum to {sum(self.probs, ZERO)}, expected 1")

    def __getitem__(self, state: str) -> Fraction:
        return self.probs[self.states.index(state)]

    def sort_key(self):
        return self.probs

    def l1_distance(self, other: "BeliefPoint") -> Fraction:
        if self.states != other.states:
            raise SpecError("beliefs over different state spaces")
        return sum((abs(a - b) for a, b in zip(self.probs, other.probs)), ZERO)

    def text(self) -> str:
        return "[" + " ".join(str(p) for p in self.probs) + "]"

    @staticmethod
    def dirac(states: Sequence[str], state: str) -> "BeliefPoint":
        return BeliefPoint(tuple(states), tuple(ONE if s == state else ZERO for s in states))

    @staticmethod
    def uniform(states: Sequence[str]) -> "BeliefPoint":
        n = len(states)
        return BeliefPoint(tuple(states), (Fraction(1, n),) * n)

    @staticmethod
    def from_weights(states: Sequence[str], weights: Mapping[str, Fraction]) -> "BeliefPoint":
        """Normalize a nonnegative weight table into a belief."""
        total = sum(weights.values(), ZERO)
        if total <= 0:
            raise SpecError("cannot normalize a zero weight table")
        return BeliefPoint(tuple(states), tuple(weights.get(s, ZERO) / total for s in states))


@dataclass(frozen=True)
class BeliefAtomLaw:
    """A finitely supported law over beliefs (a second-order belief).

    Atoms are stored sorted and deduplicated, so equality of laws is plain
    structural equality.
    """

    atoms: tuple[tuple[BeliefPoint, Fraction], ...]

    def __post_init__(self):
        _check_distribution(self.atoms, "belief-atom law")
        keys = [bp.sort_key() for bp, _ in self.atoms]
        if keys != sorted(keys) or len(set(keys)) != len(keys):
            raise SpecError("belief-atom law not canonical (unsorted or duplicate atoms)")

    @staticmethod
    def from_pairs(pairs: Iterable[tuple[BeliefPoint, Fraction]]) -> "BeliefAtomLaw":
        merged: dict[BeliefPoint, Fraction] = {}
        for bp, mass in pairs:
            if mass == 0:
                continue
            merged[bp] = merged.get(bp, ZERO) + mass
        atoms = sorted(merged.items(), key=lambda kv: kv[0].sort_key())
        return BeliefAtomLaw(tuple(atoms))

    @staticmethod
    def dirac(bp: BeliefPoint) -> "BeliefAtomLaw":
        return BeliefAtomLaw(((bp, ONE),))

    @property
    def support(self) -> tuple[BeliefPoint, ...]:
        return tuple(bp for bp, _ in self.atoms)

    def mass(self, bp: BeliefPoint) -> Fraction:
        for atom, m in self.atoms:
            if atom == bp:
                return m
        return ZERO

    def barycenter(self) -> BeliefPoint:
        states = self.atoms[0][0].states
        probs = [ZERO] * len(states)
        for bp, m in self.atoms:
            for idx, p in enumerate(bp.probs):
                probs[idx] += m * p
        return BeliefPoint(states, tuple(probs))

    def mix(self, other: "BeliefAtomLaw", weight: Fraction) -> "BeliefAtomLaw":
        """Mixture weight*self + (1-weight)*other."""
        pairs = [(bp, weight * m) for bp, m in self.atoms]
        pairs += [(bp, (1 - weight) * m) for bp, m in other.atoms]
        return BeliefAtomLaw.from_pairs(pairs)

    def sort_key(self):
        return tuple((bp.sort_key(), m) for bp, m in self.atoms)

    def text(self) -> str:
        return "{" + " ".join(f"{bp.text()}:{m}" for bp, m in self.atoms) + "}"


@dataclass(frozen=True)
class HierarchyLaw:
    """A finitely supported law over second-order beliefs."""

    atoms: tuple[tuple[BeliefAtomLaw, Fraction], ...]

    def __post_init__(self):
        _check_distribution(self.atoms, "hierarchy law")
        keys = [z.sort_key() for z, _ in self.atoms]
        if keys != sorted(keys) or len(set(keys)) != len(keys):
            raise SpecError("hierarchy law not canonical (unsorted or duplicate atoms)")

    @staticmethod
    def from_pairs(pairs: Iterable[tuple[BeliefAtomLaw, Fraction]]) -> "HierarchyLaw":
        merged: dict[BeliefAtomLaw, Fraction] = {}
        for z, mass in pairs:
            if mass == 0:
                continue
            merged[z] = merged.get(z, ZERO) + mass
        atoms = sorted(merged.items(), key=lambda kv: kv[0].sort_key())
        return HierarchyLaw(tuple(atoms))

    @staticmethod
    def dirac(z: BeliefAtomLaw) -> "HierarchyLaw":
        return HierarchyLaw(((z, ONE),))

    @property
    def support(self) -> tuple[BeliefAtomLaw, ...]:
        return tuple(z for z, _ in self.atoms)

    def text(self) -> str:
        return "<" + " ".join(f"{z.text()}:{m}" for z, m in self.atoms) + ">"


@dataclass(frozen=True)
class Evaluation:
    """A finite weight sequence over stages, summing to one."""

    weights: tuple[Fraction, ...]

    def __post_init__(self):
        if not self.weights:
            raise SpecError("empty evaluation")
        if any(w < 0 for w in self.weights):
            raise SpecError("negative evaluation weight")
        if sum(self.weights, ZERO) != 1:
            raise SpecError(f"evaluation weights sum to {sum(self.weights, ZERO)}, expected 1")

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def horizon(self) -> int:
        """Index of the last stage with positive weight (stages beyond it are irrelevant)."""
        last = 0
        for idx, w in enumerate(self.weights):
            if w > 0:
                last = idx + 1
        return last

    def tail(self) -> "Evaluation":
        """Renormalized continuation weights from stage 2 on.

        When all the remaining mass sits on stage 1 the continuation is
        irrelevant; the degenerate case is fixed to the one-stage evaluation
        so that downstream recursions stay deterministic.
        """
        rest = sum(self.weights[1:], ZERO)
        if rest == 0:
            return Evaluation((ONE,))
        return Evaluation(tuple(w / rest for w in self.weights[1:]))

    @staticmethod
    def uniform(n: int) -> "Evaluation":
        if n < 1:
            raise SpecError("uniform evaluation needs at least one stage")
        return Evaluation((Fraction(1, n),) * n)

    @staticmethod
    def window(m: int, n: int) -> "Evaluation":
        """Zero weight on stages 1..m, uniform weight on the next n stages."""
        if m < 0 or n < 1:
            raise SpecError("window needs m >= 0 and n >= 1")
        return Evaluation((ZERO,) * m + (Fraction(1, n),) * n)

    @staticmethod
    def parse(text: str) -> "Evaluation":
        return Evaluation(tuple(parse_fraction(part) for part in text.replace(",", " ").split()))

    def text(self) -> str:
        return ",".join(str(w) for w in self.weights)


# Transition atoms: (new_state, signal1, signal2) -> mass.
TransitionRow = Mapping[tuple[str, str, str], Fraction]


@dataclass(frozen=True)
class GameSpec:
    """A finite zero-sum repeated game: states, actions, signals, payoff, transition."""

    states: tuple[str, ...]
    actions1: tuple[str, ...]
    actions2: tuple[str, ...]
    signals1: tuple[str, ...]
    signals2: tuple[str, ...]
    payoff: Mapping[tuple[str, str, str], Fraction]
    transition: Mapping[tuple[str, str, str], TransitionRow]

    def __post_init__(self):
        for name, labels in (
            ("states", self.states),
            ("actions1", self.actions1),
            ("actions2", self.actions2),
            ("signals1", self.signals1),
            ("signals2", self.signals2),
        ):
            if not labels:
                raise SpecError(f"{name} must be nonempty")
            if len(set(labels)) != len(labels):
                raise SpecError(f"duplicate label in {name}")
        for k in self.states:
            for i in self.actions1:
                for j in self.actions2:
                    if (k, i, j) not in self.payoff:
                        raise SpecError(f"missing payoff entry for ({k} {i} {j})")
                    row = self.transition.get((k, i, j))
                    if row is None:
                        raise SpecError(f"missing transition row for ({k} {i} {j})")
                    total = ZERO
                    for (k2, c, d), mass in row.items():
                        if k2 not in self.states or c not in self.signals1 or d not in self.signals2:
                            raise SpecError(f"transition ({k} {i} {j}) references unknown label ({k2} {c} {d})")
                        if mass <= 0:
                            raise SpecError(f"transition ({k} {i} {j}) has nonpositive atom at ({k2} {c} {d})")
                        total += mass
                    if total != 1:
                        raise SpecError(f"transition row ({k} {i} {j}) sums to {total}, expected 1")

    def g(self, k: str, i: str, j: str) -> Fraction:
        try:
            return self.payoff[(k, i, j)]
        except KeyError:
            raise SpecError(f"unknown payoff key ({k} {i} {j})") from None

    def q(self, k: str, i: str, j: str) -> TransitionRow:
        return self.transition[(k, i, j)]

    @property
    def payoff_range(self) -> tuple[Fraction, Fraction]:
        values = list(self.payoff.values())
        return min(values), max(values)

    @property
    def payoff_span(self) -> Fraction:
        lo, hi = self.payoff_range
        return hi - lo


def stage_payoff_extended(spec: GameSpec, p: BeliefPoint, i: str, j: str) -> Fraction:
    """Payoff linearly extended to beliefs: sum_k p(k) g(k,i,j)."""
    if i not in spec.actions1:
        raise SpecError(f"unknown action1 label {i!r}")
    if j not in spec.actions2:
        raise SpecError(f"unknown action2 label {j!r}")
    return sum((p.probs[idx] * spec.g(k, i, j) for idx, k in enumerate(spec.states)), ZERO)


def transition_extended(spec: GameSpec, p: BeliefPoint, i: str, j: str) -> dict[tuple[str, str, str], Fraction]:
    """Transition linearly extended to beliefs: sum_k p(k) q(k,i,j)."""
    out: dict[tuple[str, str, str], Fraction] = {}
    for idx, k in enumerate(spec.states):
        w = p.probs[idx]
        if w == 0:
            continue
        for atom, mass in spec.q(k, i, j).items():
            out[atom] = out.get(atom, ZERO) + w * mass
    return out


@dataclass(frozen=True)
class InitialLaw:
    """Finitely supported initial law over state x signal1 x signal2.

    Signal labels are opaque; the stage-one alphabets may differ from the
    per-stage alphabets of the hosting game.
    """

    support: tuple[tuple[str, Label, Label, Fraction], ...]
    states: tuple[str, ...]

    def __post_init__(self):
        total = ZERO
        seen = set()
        for k, c, d, mass in self.support:
            if k not in self.states:
                raise SpecError(f"initial law references unknown state {k!r}")
            if mass <= 0:
                raise SpecError(f"initial law has nonpositive mass at ({k},{label_text(c)},{label_text(d)})")
            if (k, c, d) in seen:
                raise SpecError(f"duplicate initial atom ({k},{label_text(c)},{label_text(d)})")
            seen.add((k, c, d))
            total += mass
        if total != 1:
            raise SpecError(f"initial masses sum to {total}, expected 1")

    @staticmethod
    def from_pairs(states: Sequence[str], pairs: Iterable[tuple[str, Label, Label, Fraction]]) -> "InitialLaw":
        merged: dict[tuple[str, Label, Label], Fraction] = {}
        for k, c, d, mass in pairs:
            if mass == 0:
                continue
            merged[(k, c, d)] = merged.get((k, c, d), ZERO) + mass
        rows = sorted(
            ((k, c, d, m) for (k, c, d), m in merged.items()),
            key=lambda row: (label_text(row[1]), label_text(row[2]), row[0]),
        )
        return InitialLaw(tuple(rows), tuple(states))

    @property
    def signals1(self) -> tuple[Label, ...]:
        out: list[Label] = []
        for _, c, _, _ in self.support:
            if c not in out:
                out.append(c)
        return tuple(out)

    @property
    def signals2(self) -> tuple[Label, ...]:
        out: list[Label] = []
        for _, _, d, _ in self.support:
            if d not in out:
                out.append(d)
        return tuple(out)

    def mass_c(self, c: Label) -> Fraction:
        return sum((m for k, cc, d, m in self.support if cc == c), ZERO)

    def mass_d(self, d: Label) -> Fraction:
        return sum((m for k, c, dd, m in self.support if dd == d), ZERO)

    def mass_cd(self, c: Label, d: Label) -> Fraction:
        return sum((m for k, cc, dd, m in self.support if cc == c and dd == d), ZERO)

    def mass_kc(self, k: str, c: Label) -> Fraction:
        return sum((m for kk, cc, d, m in self.support if kk == k and cc == c), ZERO)

    def mass_kcd(self, k: str, c: Label, d: Label) -> Fraction:
        return sum((m for kk, cc, dd, m in self.support if kk == k and cc == c and dd == d), ZERO)

    def state_given_c(self, c: Label) -> BeliefPoint:
        """Conditional law of the state given the player-1 signal."""
        weights = {k: self.mass_kc(k, c) for k in self.states}
        return BeliefPoint.from_weights(self.states, weights)


# ---------------------------------------------------------------------------
# Spec-file grammar
# ---------------------------------------------------------------------------

_SECTIONS = ("game", "payoff", "transition", "initial")


def parse_game_spec(text: str) -> tuple[GameSpec, InitialLaw]:
    """Parse the line-oriented spec format.

    Sections: [game] (label alphabets), [payoff] `k i j = q`, [transition]
    `k i j -> k' c d : q` (one line per atom, omitted atoms are mass 0), and
    [initial] `k c' d' : q` with stage-one labels declared inline.  Comments
    start with `#`.
    """
    alphabets: dict[str, tuple[str, ...]] = {}
    payoff: dict[tuple[str, str, str], Fraction] = {}
    transition: dict[tuple[str, str, str], dict[tuple[str, str, str], Fraction]] = {}
    initial_rows: list[tuple[str, str, str, Fraction]] = []
    section = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SECTIONS:
                raise SpecError(f"unknown section [{section}]", lineno)
            continue
        if section == "game":
            if "=" not in line:
                raise SpecError("expected `name = labels...`", lineno)
            name, labels = line.split("=", 1)
            name = name.strip()
            if name not in ("states", "actions1", "actions2", "signals1", "signals2"):
                raise SpecError(f"unknown [game] key {name!r}", lineno)
            alphabets[name] = tuple(labels.split())
        elif section == "payoff":
            if "=" not in line:
                raise SpecError("expected `k i j = q`", lineno)
            lhs, rhs = line.split("=", 1)
            parts = lhs.split()
            if len(parts) != 3:
                raise SpecError("expected `k i j = q`", lineno)
            key = (parts[0], parts[1], parts[2])
            if key in payoff:
                raise SpecError(f"duplicate payoff entry for ({' '.join(key)})", lineno)
            payoff[key] = parse_fraction(rhs, lineno)
        elif section == "transition":
            if "->" not in line or ":" not in line:
                raise SpecError("expected `k i j -> k' c d : q`", lineno)
            lhs, rest = line.split("->", 1)
            mid, mass_text = rest.rsplit(":", 1)
            src = lhs.split()
            dst = mid.split()
            if len(src) != 3 or len(dst) != 3:
                raise SpecError("expected `k i j -> k' c d : q`", lineno)
            key = (src[0], src[1], src[2])
            atom = (dst[0], dst[1], dst[2])
            row = transition.setdefault(key, {})
            if atom in row:
                raise SpecError(f"duplicate transition atom ({' '.join(key)}) -> ({' '.join(atom)})", lineno)
            row[atom] = parse_fraction(mass_text, lineno)
        elif section == "initial":
            if ":" not in line:
                raise SpecError("expected `k c' d' : q`", lineno)
            lhs, mass_text = line.rsplit(":", 1)
            parts = lhs.split()
            if len(parts) != 3:
                raise SpecError("expected `k c' d' : q`", lineno)
            initial_rows.append((parts[0], parts[1], parts[2], parse_fraction(mass_text, lineno)))
        else:
            raise SpecError("content outside any section", lineno)

    for name in ("states", "actions1", "actions2", "signals1", "signals2"):
        if name not in alphabets:
            raise SpecError(f"[game] section missing {name!r}")
    spec = GameSpec(
        states=alphabets["states"],
        actions1=alphabets["actions1"],
        actions2=alphabets["actions2"],
        signals1=alphabets["signals1"],
        signals2=alphabets["signals2"],
        payoff=payoff,
        transition=transition,
    )
    if not initial_rows:
        raise SpecError("[initial] section missing or empty")
    law = InitialLaw.from_pairs(spec.states, initial_rows)
    return spec, law


def serialize_game_spec(spec: GameSpec, law: InitialLaw) -> str:
    """Canonical text form: sorted keys, reduced fractions.

    `parse_game_spec(serialize_game_spec(spec, law))` reproduces the pair
    exactly whenever the stage-one labels are plain strings.
    """
    lines = ["[game]"]
    lines.append("states = " + " ".join(spec.states))
    lines.append("actions1 = " + " ".join(spec.actions1))
    lines.append("actions2 = " + " ".join(spec.actions2))
    lines.append("signals1 = " + " ".join(spec.signals1))
    lines.append("signals2 = " + " ".join(spec.signals2))
    lines.append("[payoff]")
    for k in spec.states:
        for i in spec.actions1:
            for j in spec.actions2:
                lines.append(f"{k} {i} {j} = {spec.g(k, i, j)}")
    lines.append("[transition]")
    for k in spec.states:
        for i in spec.actions1:
            for j in spec.actions2:
                row = spec.q(k, i, j)
                for k2 in spec.states:
                    for c in spec.signals1:
                        for d in spec.signals2:
                            mass = row.get((k2, c, d))
                            if mass:
                                lines.append(f"{k} {i} {j} -> {k2} {c} {d} : {mass}")
    lines.append("[initial]")
    for k, c, d, mass in law.support:
        lines.append(f"{k} {label_text(c)} {label_text(d)} : {mass}")
    return "\n".join(lines) + "\n"


def spec_digest(spec: GameSpec, law: InitialLaw) -> str:
    """Stable hex digest of the canonical serialization."""
    return hashlib.sha256(serialize_game_spec(spec, law).encode("utf-8")).hexdigest()
