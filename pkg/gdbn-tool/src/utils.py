import sys
import time
from concurrent.futures import ThreadPoolExecutor
from functools import wraps
from math import floor
from typing import Any, Callable, Optional, Sequence, TypeVar, cast

import click
import enlighten
import numpy as np

# https://mypy.readthedocs.io/en/stable/generics.html#declaring-decorators
F = TypeVar("F", bound=Callable[..., Any])
T = TypeVar("T")
R = TypeVar("R")


TEXT_BOLD = "\033[1m"
TEXT_END = "\033[0m"


def bold(text: Any) -> str:
    return f"{TEXT_BOLD}{text}{TEXT_END}"


def status(message: str) -> None:
    """
    Progress and status lines go to standard error so result data on standard output stays machine-parseable.
    """

    click.echo(message, err=True)


def text_to_list(input_text: str) -> list[int]:
    """
    Helper function to translate strings like "[2, 4, 5, 6]", "2,4,5" or "0..20" into sorted lists.
    """

    if not input_text:
        return []
    stripped = input_text.strip("][").replace(" ", "")
    if ".." in stripped:
        start, stop = stripped.split("..", 1)
        return list(range(int(start), int(stop) + 1))
    return sorted([int(x) for x in stripped.split(",")])


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    """
    Independent, reproducible stream for the job identified by `keys` under the master `seed`.
    """

    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(keys)))


def exit_code_handler(func: F) -> F:
    """
    Function decorator which reports uncaught tool and IO failures on standard error and exits with code 1.
    Usage errors raised by click itself keep their own exit code of 2.
    """

    from src.exc import GdbnException

    @wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except (GdbnException, OSError) as e:
            click.echo(f"An error occurred:\n{bold(e)}", err=True)
            sys.exit(1)

    return cast(F, wrapper)


def time_to_hours_minutes_seconds(t: float) -> tuple[int, int, int]:
    hours = int(floor(t / 3600))
    mins = int(floor(t / 60) - hours * 60)
    secs = int(t - (mins * 60) - (hours * 3600))
    return hours, mins, secs


def log_hours_minutes_seconds_elapsed(t0: float) -> None:
    hours, mins, secs = time_to_hours_minutes_seconds(time.time() - t0)
    message = "Elapsed time: "
    if hours > 0:
        message += f"{hours} hour{'s' if hours != 1 else ''}, "
    message += f"{mins} minute{'s' if mins != 1 else ''} and {secs} second{'s' if secs != 1 else ''}."
    status(message)


def fan_out(
    func: Callable[[T], R], tasks: Sequence[T], jobs: int = 1, progress: Optional[enlighten.Counter] = None
) -> list[R]:
    """
    Run `func` over `tasks` on a thread pool of `jobs` workers. Results come back in task order whatever the worker
    count, so outputs never depend on it.
    """

    results = []
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        for result in pool.map(func, tasks):
            results.append(result)
            if progress is not None:
                progress.update()
    return results
