"""Figure specifications: flat key-value files pointing at sweep CSVs."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

CSV_HEADER = ("sweep_value,p_l_lower,p_l_upper,std_err,"
              "baseline_bare,baseline_echo,sampled_mass,wall_s")
CSV_COLUMNS = CSV_HEADER.split(",")


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class Series:
    csv: str
    label: str


@dataclass(frozen=True)
class FigureSpec:
    series: tuple[Series, ...]
    out: str
    title: str = ""
    xlabel: str = "sweep value"
    ylabel: str = "logical error rate"
    xscale: str = "log"
    yscale: str = "log"
    marker: float | None = None      # vertical reference abscissa
    baselines_from: int = 1          # 1-based series whose baselines are drawn

    def __post_init__(self):
        if not self.series:
            raise SpecError("at least one input series is required")
        if self.xscale not in ("log", "linear") or self.yscale not in ("log", "linear"):
            raise SpecError("axis scales must be 'log' or 'linear'")
        if not 1 <= self.baselines_from <= len(self.series):
            raise SpecError("baselines series index out of range")


def parse_spec_file(path: str | Path) -> FigureSpec:
    """Flat `key = value` lines; series keyed as series.<n>.csv / .label."""
    entries: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecError(f"{path}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        entries[key] = value

    series = []
    index = 1
    while f"series.{index}.csv" in entries:
        series.append(Series(entries.pop(f"series.{index}.csv"),
                             entries.pop(f"series.{index}.label", f"series {index}")))
        index += 1
    if any(key.startswith("series.") for key in entries):
        stray = sorted(k for k in entries if k.startswith("series."))
        raise SpecError(f"{path}: non-contiguous series keys {stray}")
    if "out" not in entries:
        raise SpecError(f"{path}: missing 'out' image path")

    marker = entries.pop("marker", None)
    return FigureSpec(
        series=tuple(series),
        out=entries.pop("out"),
        title=entries.pop("title", ""),
        xlabel=entries.pop("xlabel", "sweep value"),
        ylabel=entries.pop("ylabel", "logical error rate"),
        xscale=entries.pop("xscale", "log"),
        yscale=entries.pop("yscale", "log"),
        marker=float(marker) if marker is not None else None,
        baselines_from=int(entries.pop("baselines", 1)),
    )


def load_series_csv(path: str | Path) -> dict[str, list[float]]:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise SpecError(f"{path}: empty file")
    header = lines[0].split(",")
    missing = [c for c in CSV_COLUMNS if c not in header]
    if missing:
        raise SpecError(f"{path}: missing columns {missing}")
    rows = [line for line in lines[1:] if line.strip()]
    if not rows:
        raise SpecError(f"{path}: empty series")
    data: dict[str, list[float]] = {c: [] for c in header}
    for line in rows:
        cells = line.split(",")
        if len(cells) != len(header):
            raise SpecError(f"{path}: malformed row {line!r}")
        for column, cell in zip(header, cells):
            data[column].append(float(cell))
    return data
