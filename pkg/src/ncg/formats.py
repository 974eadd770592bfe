"""Profile file formats and JSON serialization helpers.

Text format, one profile per file::

    ncg n=<int> alpha=<p>/<q>
    # comment lines start with '#'
    <buyer> <target>

one purchase per line, players 0-indexed.  The JSON mirror is
``{"n": ..., "alpha": {"num": p, "den": q}, "purchases": [[u, v], ...]}``.
Alpha is accepted as ``p/q`` or a plain integer; decimals are rejected to
keep every cost exact.
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction

from .errors import FormatError
from .game import INF, Game, StrategyProfile


def parse_rational(text: str) -> Fraction:
    """Parse 'p/q' or an integer literal; decimals are rejected."""
    text = text.strip()
    if "." in text or "e" in text.lower():
        raise FormatError(f"decimal rationals are not accepted, write p/q: {text!r}")
    try:
        if "/" in text:
            num, den = text.split("/", 1)
            return Fraction(int(num), int(den))
        return Fraction(int(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"bad rational {text!r}: {exc}") from None


def rational_to_text(value: Fraction) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def rational_to_json(value):
    """{'num': p, 'den': q} for rationals, the string 'inf' for the sentinel."""
    if value == INF:
        return "inf"
    if value == -INF:
        return "-inf"
    value = Fraction(value)
    return {"num": value.numerator, "den": value.denominator}


def rational_from_json(obj):
    if obj == "inf":
        return INF
    if obj == "-inf":
        return -INF
    return Fraction(obj["num"], obj["den"])


def profile_to_text(game: Game, profile: StrategyProfile) -> str:
    lines = [f"ncg n={game.n} alpha={rational_to_text(game.alpha)}"]
    lines.extend(f"{u} {t}" for u, t in profile.canonical())
    return "\n".join(lines) + "\n"


def parse_profile_text(text: str) -> tuple[Game, StrategyProfile]:
    """Parse the text format; raises FormatError with the offending line number."""
    n = None
    alpha = None
    pairs: list[tuple[int, int]] = []
    seen_pairs: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if n is None:
            parts = line.split()
            if len(parts) != 3 or parts[0] != "ncg":
                raise FormatError("expected header 'ncg n=<int> alpha=<p>/<q>'", lineno)
            fields = {}
            for part in parts[1:]:
                if "=" not in part:
                    raise FormatError(f"bad header field {part!r}", lineno)
                key, value = part.split("=", 1)
                fields[key] = value
            if set(fields) != {"n", "alpha"}:
                raise FormatError("header must set exactly n and alpha", lineno)
            try:
                n = int(fields["n"])
            except ValueError:
                raise FormatError(f"bad player count {fields['n']!r}", lineno) from None
            try:
                alpha = parse_rational(fields["alpha"])
            except FormatError as exc:
                raise FormatError(str(exc), lineno) from None
            if n < 1 or alpha < 0:
                raise FormatError("need n >= 1 and alpha >= 0", lineno)
            continue
        parts = line.split()
        if len(parts) != 2:
            raise FormatError(f"expected '<buyer> <target>', got {line!r}", lineno)
        try:
            u, t = int(parts[0]), int(parts[1])
        except ValueError:
            raise FormatError(f"non-integer purchase {line!r}", lineno) from None
        if not (0 <= u < n and 0 <= t < n):
            raise FormatError(f"purchase ({u}, {t}) out of range for n={n}", lineno)
        if u == t:
            raise FormatError(f"player {u} buys a link to itself", lineno)
        if (u, t) in seen_pairs:
            raise FormatError(f"duplicate purchase ({u}, {t})", lineno)
        seen_pairs.add((u, t))
        pairs.append((u, t))
    if n is None:
        raise FormatError("empty input: missing 'ncg' header")
    return Game(n, alpha), StrategyProfile.from_pairs(n, pairs)


def profile_to_json_dict(game: Game, profile: StrategyProfile) -> dict:
    return {
        "n": game.n,
        "alpha": rational_to_json(game.alpha),
        "purchases": [[u, t] for u, t in profile.canonical()],
    }


def parse_profile_json(data) -> tuple[Game, StrategyProfile]:
    if isinstance(data, (str, bytes)):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise FormatError(f"bad JSON: {exc}") from None
    try:
        n = int(data["n"])
        alpha = rational_from_json(data["alpha"])
        pairs = [(int(u), int(t)) for u, t in data["purchases"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad profile JSON: {exc}") from None
    for u, t in pairs:
        if not (0 <= u < n and 0 <= t < n) or u == t:
            raise FormatError(f"bad purchase ({u}, {t}) for n={n}")
    return Game(n, Fraction(alpha)), StrategyProfile.from_pairs(n, pairs)


def load_profile(path: str) -> tuple[Game, StrategyProfile]:
    """Load either format, chosen by content (JSON object vs text header)."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return parse_profile_json(stripped)
    return parse_profile_text(text)


def profile_id(profile: StrategyProfile) -> str:
    """Stable short identifier of the canonical purchase list."""
    payload = json.dumps([profile.n, [list(p) for p in profile.canonical()]])
    return hashlib.sha1(payload.encode()).hexdigest()[:12]
