"""Flat dotted-key run configuration.

A config file is plain UTF-8 text, one `key = value` pair per line, with
`#` comments.  Values are Python literals (numbers, quoted strings,
lists); bare words are taken as strings.  Example::

    problem.potential = "quartic"
    problem.lambda = 0.02
    basis.family = "ho"
    basis.sector = "even"
    ladder.M = [20, 25, 30, 35]
    precision = "double"

Precision accepts "double", "dd" (double-double, about 31 significant
digits), "extended" with `precision.digits`, or a bare integer digit
count.  Extended runs with 31 digits or fewer use the double-double
kernel; higher digit counts switch to arbitrary precision.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, replace

from . import basis as basis_mod
from . import potentials
from .basis import BasisSpec, make_basis
from .potentials import AngularSector, PotentialSpec

DD_DIGITS = 31


class ConfigError(ValueError):
    pass


def parse_config(text: str) -> dict:
    """Dotted keys to literal values, later lines overriding earlier ones."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if not key or not val:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        try:
            out[key] = ast.literal_eval(val)
        except (ValueError, SyntaxError):
            out[key] = val
    return out


_COEFF_KEYS = {
    "quartic": ("lambda",),
    "sextic": ("g",),
    "cubic": ("gamma",),
    "gaussian_quartic": ("lambda", "depth", "beta"),
    "mexican_hat": ("g",),
    "bardsley": ("v0",),
    "pure_ho": (),
}


def _build_potential(kind: str, coeffs: dict) -> PotentialSpec:
    if kind == "quartic":
        return potentials.quartic_potential(coeffs["lambda"])
    if kind == "sextic":
        return potentials.sextic_potential(coeffs["g"])
    if kind == "cubic":
        return potentials.cubic_potential(coeffs["gamma"])
    if kind == "gaussian_quartic":
        return potentials.gaussian_quartic_potential(
            coeffs["lambda"],
            depth=coeffs.get("depth", 5.0),
            beta=coeffs.get("beta", 0.1),
        )
    if kind == "mexican_hat":
        return potentials.mexican_hat_potential(
            coeffs["g"], l=coeffs["l"], D=coeffs.get("D", 2)
        )
    if kind == "bardsley":
        return potentials.bardsley_potential(coeffs["v0"])
    if kind == "pure_ho":
        return potentials.pure_ho_potential()
    raise ConfigError(f"unknown potential kind {kind!r}")


def _resolve_tier(data: dict):
    raw = data.get("precision", "double")
    digits = data.get("precision.digits")
    if isinstance(raw, int) and not isinstance(raw, bool):
        digits = raw
        raw = "extended"
    if raw == "double":
        return None
    if raw == "dd":
        return "dd"
    if raw == "extended":
        if digits is None:
            digits = DD_DIGITS
        digits = int(digits)
        if digits < 16:
            raise ConfigError("extended precision needs at least 16 digits")
        return "dd" if digits <= DD_DIGITS else digits
    raise ConfigError(f"unknown precision tier {raw!r}")


@dataclass(frozen=True)
class RunConfig:
    """Everything a batch run needs, validated."""

    kind: str
    potential: PotentialSpec
    family: str
    sector: str
    M_list: tuple
    tier: object = None
    l: int | None = None
    D: int = 2
    tol: float = 1e-8
    window: float = 0.5
    refine: bool | None = None
    starts: tuple = ()
    probe: bool = True
    out_format: str = "csv"
    out_path: str | None = None
    samples: int = 400
    xmax: float | None = None
    label: str = "run"

    def __post_init__(self):
        if not self.M_list:
            raise ConfigError("ladder.M must be non-empty")
        if list(self.M_list) != sorted(set(self.M_list)):
            raise ConfigError("ladder.M must be strictly increasing")
        if self.out_format not in ("csv", "json"):
            raise ConfigError(f"unknown output format {self.out_format!r}")

    @property
    def do_refine(self) -> bool:
        if self.refine is None:
            return self.tier == "dd"
        return bool(self.refine)

    def sector_bases(self) -> list[tuple[str, BasisSpec]]:
        """Resolve family and sector to one basis per symmetry block."""
        fam, sec = self.family, self.sector
        if fam in ("radial_ho", "radial_trig"):
            label = "radial" if self.l is None else f"l={self.l}"
            if fam == "radial_ho":
                if self.l is None:
                    raise ConfigError("radial_ho needs problem.l")
                lam = AngularSector(self.l, self.D).lam
                return [(label, make_basis(fam, lam=lam))]
            return [(label, make_basis(fam))]
        if fam == "shifted_ho":
            return [("all", make_basis(fam))]
        if fam in ("trig", "trig_even", "trig_odd"):
            if fam != "trig":
                sec = fam.split("_")[1]
            pick = {"even": basis_mod.TRIG_EVEN, "odd": basis_mod.TRIG_ODD}
            if sec == "both":
                return [(s, make_basis(pick[s])) for s in ("even", "odd")]
            if sec not in pick:
                raise ConfigError(f"trig sector must be even, odd or both, got {sec!r}")
            return [(sec, make_basis(pick[sec]))]
        if fam == "ho":
            if sec == "both":
                return [(s, make_basis("ho", s)) for s in ("even", "odd")]
            if sec not in ("even", "odd"):
                raise ConfigError(f"ho sector must be even, odd or both, got {sec!r}")
            return [(sec, make_basis("ho", sec))]
        raise ConfigError(f"unknown basis family {fam!r}")


def from_dict(data: dict, label: str = "run") -> RunConfig:
    kind = data.get("problem.potential")
    if not kind:
        raise ConfigError("problem.potential is required")
    coeffs = {}
    for name in _COEFF_KEYS.get(kind, ()):
        key = f"problem.{name}"
        if key in data:
            coeffs[name] = data[key]
    for name in _COEFF_KEYS.get(kind, ()):
        if name not in coeffs and name in ("lambda", "g", "gamma", "v0"):
            raise ConfigError(f"problem.{name} is required for {kind!r}")
    l = data.get("problem.l")
    D = int(data.get("problem.D", 2))
    if kind == "mexican_hat":
        if l is None:
            raise ConfigError("mexican_hat needs problem.l")
        coeffs["l"] = int(l)
        coeffs["D"] = D

    M_raw = data.get("ladder.M")
    if M_raw is None:
        raise ConfigError("ladder.M is required")
    if isinstance(M_raw, int):
        M_raw = [M_raw]
    M_list = tuple(int(m) for m in M_raw)

    starts = []
    for item in data.get("optimizer.starts", []):
        if isinstance(item, (list, tuple)):
            if len(item) == 2 and all(isinstance(v, (int, float)) for v in item):
                starts.append(complex(item[0], item[1]))
            else:
                starts.append(tuple(complex(p[0], p[1]) for p in item))
        else:
            starts.append(complex(item))

    return RunConfig(
        kind=kind,
        potential=_build_potential(kind, coeffs),
        family=data.get("basis.family", "ho"),
        sector=str(data.get("basis.sector", "even")),
        M_list=M_list,
        tier=_resolve_tier(data),
        l=None if l is None else int(l),
        D=D,
        tol=float(data.get("ladder.tol", 1e-8)),
        window=float(data.get("ladder.window", 0.5)),
        refine=data.get("ladder.refine"),
        starts=tuple(starts),
        probe=bool(data.get("optimizer.probe", True)),
        out_format=str(data.get("output.format", "csv")),
        out_path=data.get("output.path"),
        samples=int(data.get("output.samples", 400)),
        xmax=None if data.get("output.xmax") is None else float(data["output.xmax"]),
        label=label,
    )


def from_file(path, label: str | None = None) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    name = label
    if name is None:
        name = str(path).rsplit("/", 1)[-1].removesuffix(".cfg")
    return from_dict(parse_config(text), label=name)


def with_overrides(cfg: RunConfig, out_format=None, out_path=None) -> RunConfig:
    fields = {}
    if out_format is not None:
        fields["out_format"] = out_format
    if out_path is not None:
        fields["out_path"] = out_path
    return replace(cfg, **fields) if fields else cfg
