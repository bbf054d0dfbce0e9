"""Experiment configs, comparison reports, CSV and SVG output."""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .predictors import COUNT_PREDICTORS, Prediction, PredictorId
from .primes import DomainError, ResourceError
from .sieve import MAX_X, count_nk

log = logging.getLogger(__name__)

Y_RULES = ("fixed", "power", "ratio", "exp_rule")


def fmt(v) -> str:
    """17 significant digits, so every float round-trips."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


@dataclass(frozen=True)
class YRule:
    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in Y_RULES:
            raise DomainError(f"unknown y rule {self.kind!r}; expected one of {', '.join(Y_RULES)}")
        if not self.value > 0:
            raise DomainError("y rule parameter must be > 0")

    @classmethod
    def parse(cls, text: str) -> "YRule":
        kind, sep, value = text.partition(":")
        if not sep:
            raise DomainError(f"y rule {text!r} must look like kind:value")
        return cls(kind.strip(), float(value))

    def raw(self, x: float) -> float:
        if self.kind == "fixed":
            return self.value
        if self.kind == "power":
            return x ** (1 / self.value)
        if self.kind == "ratio":
            return x / self.value
        return math.exp(math.log(x) / (self.value * math.log(math.log(x))))

    def __call__(self, x: float) -> float:
        """y for this x, clamped into [2, x] with a warning."""
        y = self.raw(x)
        if y < 2 or y > x:
            clamped = min(max(y, 2.0), float(x))
            log.warning("y rule %s:%g gives y = %.6g at x = %g; clamped to %g", self.kind, self.value, y, x, clamped)
            return clamped
        return y

    def __str__(self) -> str:
        return f"{self.kind}:{fmt(float(self.value))}"


@dataclass(frozen=True)
class ExperimentConfig:
    x_list: tuple[int, ...] = (10**6,)
    y_rule: YRule = YRule("power", 4.0)
    k_range: tuple[int, ...] = (1,)
    predictors: tuple[PredictorId, ...] = (PredictorId.landau,)
    out: str | None = None
    svg: str | None = None
    cache_dir: str | None = None

    def __post_init__(self):
        if not self.k_range:
            raise DomainError("k_range must be nonempty")
        if not self.x_list:
            raise DomainError("x_list must be nonempty")


def _parse_int(text: str) -> int:
    v = float(text)
    if not v.is_integer():
        raise DomainError(f"{text!r} is not an integer")
    return int(v)


def parse_k_range(text: str) -> tuple[int, ...]:
    """'0-3' or '1,2,4' or '2'."""
    text = text.strip()
    if "-" in text and "," not in text:
        lo, hi = text.split("-", 1)
        return tuple(range(_parse_int(lo), _parse_int(hi) + 1))
    return tuple(_parse_int(t) for t in text.split(",") if t.strip())


def parse_predictors(text: str) -> tuple[PredictorId, ...]:
    names = [t.strip() for t in text.split(",") if t.strip()]
    try:
        return tuple(PredictorId(n) for n in names)
    except ValueError as exc:
        raise DomainError(str(exc)) from None


def parse_config_text(text: str) -> dict[str, str]:
    """Flat key=value lines; '#' starts a comment."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise DomainError(f"config line {lineno}: expected key=value")
        out[key.strip()] = value.strip()
    return out


def build_config(values: dict[str, str], base: ExperimentConfig | None = None) -> ExperimentConfig:
    cfg = base or ExperimentConfig()
    known = {"x_list", "y_rule", "k_range", "predictors", "out", "svg", "cache_dir"}
    unknown = set(values) - known
    if unknown:
        raise DomainError(f"unknown config keys: {', '.join(sorted(unknown))}")
    changes = {}
    if "x_list" in values:
        changes["x_list"] = tuple(_parse_int(t) for t in values["x_list"].split(",") if t.strip())
    if "y_rule" in values:
        changes["y_rule"] = YRule.parse(values["y_rule"])
    if "k_range" in values:
        changes["k_range"] = parse_k_range(values["k_range"])
    if "predictors" in values:
        changes["predictors"] = parse_predictors(values["predictors"])
    for key in ("out", "svg", "cache_dir"):
        if key in values:
            changes[key] = values[key] or None
    return replace(cfg, **changes)


def load_config(path: str | Path) -> ExperimentConfig:
    return build_config(parse_config_text(Path(path).read_text()))


# --- comparison report -------------------------------------------------------

REPORT_COLUMNS = ("x", "y", "alpha", "k", "exact", "predictor", "value", "rel_error", "valid", "reason")


@dataclass(frozen=True)
class ReportRow:
    x: int
    y: float
    alpha: float
    k: int
    exact: int
    predictor: str
    value: float
    rel_error: float
    valid: bool
    reason: str = ""

    def cells(self) -> list[str]:
        return [fmt(getattr(self, c)) for c in REPORT_COLUMNS]


@dataclass
class PredictionReport:
    rows: list[ReportRow] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for row in self.rows:
            w.writerow(row.cells())
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "PredictionReport":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        if tuple(header) != REPORT_COLUMNS:
            raise ValueError("not a prediction report")
        rows = []
        for r in reader:
            d = dict(zip(header, r))
            rows.append(ReportRow(
                x=int(d["x"]), y=float(d["y"]), alpha=float(d["alpha"]), k=int(d["k"]),
                exact=int(d["exact"]), predictor=d["predictor"], value=float(d["value"]),
                rel_error=float(d["rel_error"]), valid=d["valid"] == "true", reason=d["reason"],
            ))
        return cls(rows)

    def series(self, predictor: str, k: int) -> list[tuple[int, float]]:
        """(x, rel_error) pairs for one predictor and k, in x order."""
        return [(r.x, r.rel_error) for r in self.rows if r.predictor == predictor and r.k == k]


def relative_error(pred: float, exact: int) -> float:
    return abs(pred - exact) / max(exact, 1)


def compare(cfg: ExperimentConfig) -> PredictionReport:
    """One row per (x, k, predictor), sorted in that order."""
    too_big = [x for x in cfg.x_list if x > MAX_X]
    if too_big:
        raise ResourceError(f"x beyond the sieve limit {MAX_X}: {', '.join(map(str, too_big))}")
    for pid in cfg.predictors:
        if pid not in COUNT_PREDICTORS:
            raise DomainError(f"{pid.value} predicts S_z and cannot be compared with N_k")
    report = PredictionReport()
    names = sorted(cfg.predictors, key=lambda p: p.value)
    for x in sorted(cfg.x_list):
        y = cfg.y_rule(x)
        counts = count_nk(x, y)
        alpha = math.log(x) / math.log(y)
        for k in sorted(cfg.k_range):
            exact = counts[k]
            for pid in names:
                try:
                    p: Prediction = COUNT_PREDICTORS[pid](x, y, k)
                    value = float(p)
                    row = ReportRow(x, y, alpha, k, exact, pid.value, value, relative_error(value, exact),
                                    p.valid, p.reason)
                except DomainError as exc:
                    row = ReportRow(x, y, alpha, k, exact, pid.value, math.nan, math.nan, False, str(exc))
                report.rows.append(row)
    return report


# --- phenomenon --------------------------------------------------------------


@dataclass(frozen=True)
class PhenomenonRow:
    k: int
    n_k_y: int
    n_k_x: int
    n_k1_x: int

    @property
    def ratio_next(self) -> float:
        return self.n_k_y / self.n_k1_x if self.n_k1_x else math.inf

    @property
    def ratio_same(self) -> float:
        return self.n_k_y / self.n_k_x if self.n_k_x else math.inf


@dataclass(frozen=True)
class PhenomenonReport:
    x: int
    c: float
    y_raw: float
    y: float
    rows: tuple[PhenomenonRow, ...]

    @property
    def clamped(self) -> bool:
        return self.y != self.y_raw

    def row(self, k: int) -> PhenomenonRow:
        return self.rows[k]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "n_k_y", "n_k_x", "n_k1_x", "ratio_next", "ratio_same"])
        for r in self.rows:
            w.writerow([r.k, r.n_k_y, r.n_k_x, r.n_k1_x, fmt(r.ratio_next), fmt(r.ratio_same)])
        return buf.getvalue()

    def summary(self, k: int = 1) -> str:
        r = self.row(k)
        lines = [f"x = {self.x}, c = {fmt(self.c)}, y = {fmt(self.y)}"
                 + (f" (clamped from {fmt(self.y_raw)})" if self.clamped else "")]
        lines.append(f"k = {k}: N_k(x,y)/N_k+1(x,x) = {r.ratio_next:.6g}, "
                     f"N_k(x,y)/N_k(x,x) = {r.ratio_same:.6g}")
        return "\n".join(lines)


def phenomenon(x: int, c: float = 12.0, k_max: int | None = None) -> PhenomenonReport:
    """N_k(x, y) next to N_k(x) and N_{k+1}(x) for y = exp(log x / (c loglog x))."""
    if x < 10**6:
        raise DomainError("x must be >= 10^6")
    if not c > 0:
        raise DomainError("c must be > 0")
    rule = YRule("exp_rule", c)
    y_raw = rule.raw(x)
    y = rule(x)
    small = count_nk(x, y)
    full = count_nk(x, x)
    top = k_max if k_max is not None else max(small.k_max, 1)
    rows = tuple(PhenomenonRow(k, small[k], full[k], full[k + 1]) for k in range(top + 1))
    return PhenomenonReport(int(x), c, y_raw, y, rows)


# --- SVG ---------------------------------------------------------------------

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf")


def svg_plot(series: dict[str, tuple[list[float], list[float]]], *, title: str = "",
             xlabel: str = "", ylabel: str = "", logx: bool = False,
             width: int = 640, height: int = 400) -> str:
    """Static line plot: one polyline per series, axes with end labels."""
    pad_l, pad_r, pad_t, pad_b = 70, 130, 30, 45
    pts = {}
    for name, (xs, ys) in series.items():
        pairs = [(math.log10(a) if logx else a, b) for a, b in zip(xs, ys)
                 if math.isfinite(b) and (a > 0 or not logx)]
        pts[name] = pairs
    allx = [p[0] for v in pts.values() for p in v] or [0.0, 1.0]
    ally = [p[1] for v in pts.values() for p in v] or [0.0, 1.0]
    x0, x1 = min(allx), max(allx)
    y0, y1 = min(ally), max(ally)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1
    pw, ph = width - pad_l - pad_r, height - pad_t - pad_b

    def sx(v):
        return pad_l + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return pad_t + ph - (v - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="11">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<line x1="{pad_l}" y1="{pad_t + ph}" x2="{pad_l + pw}" y2="{pad_t + ph}" stroke="black"/>',
           f'<line x1="{pad_l}" y1="{pad_t}" x2="{pad_l}" y2="{pad_t + ph}" stroke="black"/>']
    xl = (lambda v: f"1e{v:.3g}") if logx else (lambda v: f"{v:.4g}")
    out.append(f'<text x="{pad_l}" y="{pad_t + ph + 15}" text-anchor="middle">{xl(x0)}</text>')
    out.append(f'<text x="{pad_l + pw}" y="{pad_t + ph + 15}" text-anchor="middle">{xl(x1)}</text>')
    out.append(f'<text x="{pad_l - 5}" y="{pad_t + ph}" text-anchor="end">{y0:.4g}</text>')
    out.append(f'<text x="{pad_l - 5}" y="{pad_t + 4}" text-anchor="end">{y1:.4g}</text>')
    if xlabel:
        out.append(f'<text x="{pad_l + pw / 2}" y="{height - 8}" text-anchor="middle">{_esc(xlabel)}</text>')
    if ylabel:
        out.append(f'<text x="14" y="{pad_t + ph / 2}" transform="rotate(-90 14 {pad_t + ph / 2})" '
                   f'text-anchor="middle">{_esc(ylabel)}</text>')
    if title:
        out.append(f'<text x="{pad_l + pw / 2}" y="18" text-anchor="middle">{_esc(title)}</text>')
    for i, (name, pairs) in enumerate(pts.items()):
        color = _PALETTE[i % len(_PALETTE)]
        poly = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in pairs)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{poly}"/>')
        ly = pad_t + 14 * i + 10
        out.append(f'<line x1="{pad_l + pw + 10}" y1="{ly}" x2="{pad_l + pw + 25}" y2="{ly}" stroke="{color}"/>')
        out.append(f'<text x="{pad_l + pw + 30}" y="{ly + 4}">{_esc(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def write_text(path: str | Path, text: str) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)
