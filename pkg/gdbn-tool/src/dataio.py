import os
import re
from typing import Optional, Sequence, Union

import attr
import numpy as np
import pandas as pd

from src.exc import DataFormatException, ValidationException
from src.utils import bold

EXPERIMENT_COLUMN = "experiment"

# region data types


def _as_matrix(values: object) -> np.ndarray:
    matrix = np.asarray(values, dtype=float)
    if matrix.ndim == 1:
        matrix = matrix.reshape(-1, 1)
    return matrix


@attr.s(frozen=True, eq=False)
class TimeSeriesData:
    """
    Observations x_1..x_T stacked row-wise, possibly concatenated from several experiments. `boundaries` holds the
    first row of every experiment, so transitions never span two experiments.
    """

    values: np.ndarray = attr.ib(converter=_as_matrix)
    boundaries: tuple[int, ...] = attr.ib(default=(0,), converter=lambda b: tuple(int(x) for x in b))
    columns: tuple[str, ...] = attr.ib(default=None)

    def validate(self) -> None:
        if self.values.ndim != 2 or self.values.shape[0] == 0 or self.values.shape[1] == 0:
            raise ValidationException(f"Time series need at least one row and one column, got {self.values.shape}.")
        if not np.all(np.isfinite(self.values)):
            raise ValidationException("Time series values must be finite; missing values are not supported.")
        if not self.boundaries or self.boundaries[0] != 0:
            raise ValidationException(f"Experiment boundaries {bold(self.boundaries)} must start at row 0.")
        if any(a >= b for a, b in zip(self.boundaries, self.boundaries[1:])):
            raise ValidationException(f"Experiment boundaries {bold(self.boundaries)} must be strictly increasing.")
        if self.boundaries[-1] >= self.T:
            raise ValidationException(f"Experiment boundary {bold(self.boundaries[-1])} lies outside the data.")
        if len(self.columns) != self.n:
            raise ValidationException(f"Expected {bold(self.n)} column names, got {bold(len(self.columns))}.")

    def __attrs_post_init__(self) -> None:
        if self.columns is None:
            object.__setattr__(self, "columns", tuple(f"X{i + 1}" for i in range(self.values.shape[1])))
        else:
            object.__setattr__(self, "columns", tuple(self.columns))
        self.validate()

    @property
    def T(self) -> int:
        return int(self.values.shape[0])

    @property
    def n(self) -> int:
        return int(self.values.shape[1])

    @property
    def experiments(self) -> list[tuple[int, int]]:
        stops = list(self.boundaries[1:]) + [self.T]
        return list(zip(self.boundaries, stops))

    @property
    def lengths(self) -> list[int]:
        return [stop - start for start, stop in self.experiments]

    @property
    def effective_size(self) -> int:
        """
        T* = sum over experiments of (T_k - 1).
        """

        return sum(length - 1 for length in self.lengths)

    def with_values(self, values: np.ndarray) -> "TimeSeriesData":
        return TimeSeriesData(values=values, boundaries=self.boundaries, columns=self.columns)

    @classmethod
    def concatenate(cls, parts: Sequence["TimeSeriesData"]) -> "TimeSeriesData":
        if not parts:
            raise ValidationException("Cannot concatenate zero experiments.")
        boundaries, offset = [], 0
        for part in parts:
            boundaries.extend(offset + b for b in part.boundaries)
            offset += part.T
        return cls(values=np.vstack([p.values for p in parts]), boundaries=boundaries, columns=parts[0].columns)


@attr.s(frozen=True, eq=False)
class AugmentedData:
    """
    One row z_t = (x_t, x_{t-1}) per usable transition. In external parent mode the second block holds external
    variables observed at the same time point instead of lagged values.
    """

    values: np.ndarray = attr.ib(converter=_as_matrix)
    external: bool = attr.ib(default=False)

    def __attrs_post_init__(self) -> None:
        if self.values.shape[1] % 2 != 0:
            raise ValidationException(f"Augmented rows need an even column count, got {bold(self.values.shape[1])}.")

    @property
    def n(self) -> int:
        return int(self.values.shape[1] // 2)

    @property
    def rows(self) -> int:
        return int(self.values.shape[0])

    @property
    def current(self) -> np.ndarray:
        return self.values[:, : self.n]

    @property
    def lagged(self) -> np.ndarray:
        return self.values[:, self.n :]

    def without_row(self, row: int) -> "AugmentedData":
        return AugmentedData(values=np.delete(self.values, row, axis=0), external=self.external)


def to_augmented(data: TimeSeriesData) -> AugmentedData:
    if data.effective_size < 1:
        raise ValidationException("At least one within-experiment transition is required.")
    blocks = [
        np.hstack([data.values[start + 1 : stop], data.values[start : stop - 1]])
        for start, stop in data.experiments
        if stop - start > 1
    ]
    return AugmentedData(values=np.vstack(blocks))


def as_augmented(data: Union[TimeSeriesData, AugmentedData]) -> AugmentedData:
    return data if isinstance(data, AugmentedData) else to_augmented(data)


def standardize_matrix(values: np.ndarray, names: Optional[Sequence[str]] = None) -> np.ndarray:
    """
    Column-wise z-scores with the unbiased variance. Columns are pre-scaled by their largest magnitude so explosive
    simulated series do not overflow.
    """

    values = np.asarray(values, dtype=float)
    if values.shape[0] < 2:
        raise ValidationException("Standardization needs at least two rows.")
    scale = np.max(np.abs(values), axis=0)
    scale[scale == 0] = 1.0
    scaled = values / scale
    deviations = scaled - scaled.mean(axis=0)
    sd = np.sqrt((deviations**2).sum(axis=0) / (values.shape[0] - 1))
    constant = np.flatnonzero(~(sd > 1e-12))
    if constant.size:
        labels = [names[k] if names is not None else str(k + 1) for k in constant]
        raise ValidationException(f"Cannot standardize zero-variance column(s) {bold(labels)}.")
    return deviations / sd


def external_parent_mode(
    targets: Union[TimeSeriesData, np.ndarray], externals: Union[TimeSeriesData, np.ndarray], standardize: bool = True
) -> AugmentedData:
    """
    Pair every target row with the external variables observed alongside it; externals take the place of the lagged
    block, so no observation is lost to the lag.
    """

    target_values = targets.values if isinstance(targets, TimeSeriesData) else _as_matrix(targets)
    external_values = externals.values if isinstance(externals, TimeSeriesData) else _as_matrix(externals)
    if target_values.shape != external_values.shape:
        raise ValidationException(
            f"Targets of shape {bold(target_values.shape)} and externals of shape "
            f"{bold(external_values.shape)} must match."
        )
    if standardize:
        names = externals.columns if isinstance(externals, TimeSeriesData) else None
        target_values = standardize_matrix(target_values)
        external_values = standardize_matrix(external_values, names=names)
    return AugmentedData(values=np.hstack([target_values, external_values]), external=True)


# endregion

# region csv


@attr.s
class DatasetSpec:
    path: str = attr.ib()
    columns: Optional[list[str]] = attr.ib(default=None)
    experiment_column: Optional[str] = attr.ib(default=EXPERIMENT_COLUMN)
    boundaries: Optional[list[int]] = attr.ib(default=None)
    standardize: bool = attr.ib(default=False)

    def validate(self) -> None:
        if self.columns is not None and len(self.columns) < 1:
            raise ValidationException("At least one data column must be selected.")
        if self.boundaries is not None:
            if not self.boundaries or self.boundaries[0] != 0:
                raise ValidationException(f"Experiment boundaries {bold(self.boundaries)} must start at row 0.")
            if any(a >= b for a, b in zip(self.boundaries, self.boundaries[1:])):
                raise ValidationException(
                    f"Experiment boundaries {bold(self.boundaries)} must be strictly increasing."
                )

    def __attrs_post_init__(self) -> None:
        self.validate()


def _line_of(error: Exception) -> Optional[int]:
    match = re.search(r"line (\d+)", str(error))
    return int(match.group(1)) if match else None


def _cell_value(cell: str) -> float:
    # float() parses the shortest round-trip repr exactly
    try:
        return float(cell)
    except (TypeError, ValueError):
        return np.nan


def _parse_boundaries(ids: pd.Series, path: str) -> list[int]:
    boundaries, seen = [], set()
    previous = None
    for row, cell in enumerate(ids):
        try:
            value = int(cell)
        except (TypeError, ValueError):
            raise DataFormatException(
                f"experiment id {bold(cell)} is not an integer", line=row + 2, path=path
            ) from None
        if value != previous:
            if value in seen:
                raise DataFormatException(
                    f"rows of experiment {bold(value)} are not contiguous", line=row + 2, path=path
                )
            seen.add(value)
            boundaries.append(row)
            previous = value
    return boundaries


def load_csv(spec: DatasetSpec) -> TimeSeriesData:
    if not os.path.isfile(spec.path):
        raise DataFormatException("file does not exist", path=spec.path)
    try:
        frame = pd.read_csv(spec.path, dtype=str, keep_default_na=False, encoding="utf-8", skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise DataFormatException("no header row", line=1, path=spec.path) from None
    except pd.errors.ParserError as e:
        raise DataFormatException(f"ragged row ({e})", line=_line_of(e), path=spec.path) from None
    except UnicodeDecodeError as e:
        raise DataFormatException(f"not valid UTF-8 ({e.reason})", path=spec.path) from None

    # keep_default_na=False leaves empty fields as "", so only fields absent from a short row read as NaN
    short = np.flatnonzero(frame.isna().any(axis=1).to_numpy())
    if short.size:
        row = int(short[0])
        fields = int(frame.iloc[row].notna().sum())
        raise DataFormatException(
            f"row has {bold(fields)} fields but the header names {bold(frame.shape[1])}", line=row + 2, path=spec.path
        )

    boundaries = spec.boundaries or [0]
    if spec.experiment_column is not None and spec.experiment_column in frame.columns:
        boundaries = _parse_boundaries(frame[spec.experiment_column], spec.path)
        frame = frame.drop(columns=[spec.experiment_column])
    if spec.columns is not None:
        absent = [c for c in spec.columns if c not in frame.columns]
        if absent:
            raise DataFormatException(f"columns {bold(absent)} are missing from the header", line=1, path=spec.path)
        frame = frame[spec.columns]
    if frame.shape[1] < 1:
        raise DataFormatException("no data columns", line=1, path=spec.path)
    if frame.shape[0] < 1:
        raise DataFormatException("no data rows", line=2, path=spec.path)

    values = np.empty(frame.shape, dtype=float)
    for k, column in enumerate(frame.columns):
        cells = frame[column]
        parsed = cells.map(_cell_value).to_numpy(dtype=float)
        bad = np.flatnonzero(~np.isfinite(parsed))
        if bad.size:
            row = int(bad[0])
            cell = cells.iloc[row]
            problem = "missing value" if cell == "" else f"non-numeric cell {cell!r}"
            raise DataFormatException(f"{problem} in column {bold(column)}", line=row + 2, path=spec.path)
        values[:, k] = parsed

    if boundaries[-1] >= values.shape[0]:
        raise DataFormatException(
            f"experiment boundary {bold(boundaries[-1])} lies beyond the last data row", path=spec.path
        )
    if spec.standardize:
        values = standardize_matrix(values, names=list(frame.columns))
    return TimeSeriesData(values=values, boundaries=boundaries, columns=tuple(str(c) for c in frame.columns))


def write_csv(data: TimeSeriesData, path: str) -> None:
    """
    Floats are written in their shortest round-trip representation, so `load_csv` reads back identical values.
    An `experiment` column is added when the series holds more than one experiment.
    """

    frame = pd.DataFrame({column: data.values[:, k] for k, column in enumerate(data.columns)})
    if len(data.boundaries) > 1:
        ids = np.zeros(data.T, dtype=int)
        for k, (start, stop) in enumerate(data.experiments):
            ids[start:stop] = k + 1
        frame[EXPERIMENT_COLUMN] = ids
    frame.to_csv(path, index=False, lineterminator="\n", float_format=lambda v: repr(float(v)))


# endregion
