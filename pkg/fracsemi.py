#!/usr/bin/env python3
"""
FracSemi
Conformable fractional calculus and fractional alpha-semigroups from the
command line: derivatives and integrals of order alpha in (0, 1], matrix
alpha-semigroups, the alpha-abstract Cauchy problem and fractional transport.

Usage:
  python fracsemi.py <command> --spec job.json [--out PATH] [--format csv|json]

Requirements: Python 3.8+
Install dependencies: pip install -r requirements.txt
"""

import io
import os
import csv
import sys
import json
import math
import time
import argparse
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import psutil

from fractional import (
    PROFILES, get_profile, FracSemiError, DomainError, NumericalError,
)
from fractional.cauchy import CauchyProblem, residual_check, solve_exact, solve_numeric
from fractional.conformable import (
    DERIVATIVE_METHODS, INTEGRAL_METHODS, conformable_derivative,
    conformable_derivative_at_zero, fractional_integral,
)
from fractional.matrix_semigroup import (
    AlphaSemigroup, commutation_residual, estimate_generator, semigroup_evaluate,
    semigroup_law_residual, semigroup_law_tolerance, strong_continuity_profile,
)
from fractional.properties import DEFAULT_SEED, run_properties
from fractional.transport import (
    DEFAULT_COURANT, Grid1D, TransportProblem, cfl_steps, pde_residual,
    solve_transport_exact, solve_transport_fd,
)

try:
    from rich.console import Console
    from rich.table import Table as RichTable
    from rich.logging import RichHandler
    RICH_AVAILABLE = True
    console = Console(stderr=True)
    # stdout carries the payload, so rich output only ever goes to an interactive stderr
    RICH_LIVE_OK = sys.stderr.isatty()
except ImportError:
    RICH_AVAILABLE = False
    RICH_LIVE_OK = False


# Configuration
COMMANDS = ('deriv', 'integrate', 'semigroup-check', 'gen-estimate',
            'solve-cauchy', 'solve-transport', 'properties')
FORMATS = ('json', 'csv')
LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_DOMAIN = 3
EXIT_NUMERICAL = 4

DEFAULT_WORKERS = int(os.environ.get("FRACSEMI_WORKERS", 4))
SUITE_SEED = int(os.environ.get("FRACSEMI_SEED", DEFAULT_SEED))

DEFAULT_CHECK_TIMES = [0.0, 0.1, 0.5, 1.0, 2.0, 4.0]
DEFAULT_RK_STEPS = 1000

logger = logging.getLogger('fracsemi')


class SchemaError(FracSemiError, ValueError):
    """The job specification is malformed; the message names the field."""


# ---------------------------------------------------------------------------
# Field validators
# ---------------------------------------------------------------------------

def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def check_number(name: str, value: Any, minimum: Optional[float] = None, strict: bool = False) -> float:
    if not _is_number(value):
        raise SchemaError(f"{name} must be a finite number, got {value!r}")
    if minimum is not None and (value <= minimum if strict else value < minimum):
        bound = ">" if strict else ">="
        raise SchemaError(f"{name} must be {bound} {minimum:g}, got {value!r}")
    return value


def check_alpha(name: str, value: Any) -> float:
    if not _is_number(value) or not 0 < value <= 1:
        raise SchemaError("alpha must be in (0,1]")
    return value


def check_positive_int(name: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise SchemaError(f"{name} must be a positive integer, got {value!r}")
    return value


def check_bool(name: str, value: Any) -> bool:
    if not isinstance(value, bool):
        raise SchemaError(f"{name} must be true or false, got {value!r}")
    return value


def check_matrix(name: str, value: Any) -> List[List[float]]:
    if not isinstance(value, list) or not value or not all(isinstance(row, list) for row in value):
        raise SchemaError(f"{name} must be a non-empty array of row arrays")
    if any(len(row) != len(value) for row in value):
        raise SchemaError("generator must be square" if name == 'A' else f"{name} must be square")
    if not all(_is_number(entry) for row in value for entry in row):
        raise SchemaError(f"{name} entries must be finite numbers")
    return value


def check_vector(name: str, value: Any) -> List[float]:
    if not isinstance(value, list) or not value or not all(_is_number(v) for v in value):
        raise SchemaError(f"{name} must be a non-empty array of finite numbers")
    return value


def check_times(name: str, value: Any) -> List[float]:
    check_vector(name, value)
    if value[0] < 0 or any(b < a for a, b in zip(value, value[1:])):
        raise SchemaError(f"{name} must be sorted and nonnegative")
    return value


def check_profile(name: str, value: Any) -> str:
    if not isinstance(value, str) or value.lower() not in PROFILES:
        raise SchemaError(f"{name} must be one of {', '.join(sorted(PROFILES))}, got {value!r}")
    return value


def check_choice(*choices: str) -> Callable[[str, Any], str]:
    def validate(name: str, value: Any) -> str:
        if value not in choices:
            raise SchemaError(f"{name} must be one of {', '.join(choices)}, got {value!r}")
        return value
    return validate


def check_case_names(name: str, value: Any) -> List[str]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise SchemaError(f"{name} must be an array of case names")
    return value


PROFILE_FIELDS = {
    'profile': check_profile,
    'p': check_number,
    'rate': check_number,
    'c': check_number,
    'center': check_number,
    'width': lambda name, value: check_number(name, value, 0, strict=True),
    'amplitude': check_number,
}

# command -> (required fields, {field: validator})
SCHEMA: Dict[str, Tuple[Tuple[str, ...], Dict[str, Callable[[str, Any], Any]]]] = {
    'deriv': (('profile', 'alpha', 't'), {
        **PROFILE_FIELDS,
        'alpha': check_alpha,
        't': lambda name, value: check_number(name, value, 0),
        'method': check_choice(*DERIVATIVE_METHODS),
        'b': lambda name, value: check_number(name, value, 0, strict=True),
    }),
    'integrate': (('profile', 'alpha', 't'), {
        **PROFILE_FIELDS,
        'alpha': check_alpha,
        't': lambda name, value: check_number(name, value, 0, strict=True),
        'a': lambda name, value: check_number(name, value, 0),
        'method': check_choice(*INTEGRAL_METHODS),
    }),
    'semigroup-check': (('A', 'alpha'), {
        'A': check_matrix,
        'alpha': check_alpha,
        'times': check_times,
        'x': check_vector,
    }),
    'gen-estimate': (('A', 'alpha'), {
        'A': check_matrix,
        'alpha': check_alpha,
        'b': lambda name, value: check_number(name, value, 0, strict=True),
        'probes': check_matrix,
    }),
    'solve-cauchy': (('A', 'u0', 'alpha', 'times'), {
        'A': check_matrix,
        'u0': check_vector,
        'alpha': check_alpha,
        'times': check_times,
        'method': check_choice('exact', 'numeric', 'both'),
        'n_steps': check_positive_int,
        'residual': check_bool,
    }),
    'solve-transport': (('profile', 'alpha', 'x_max', 'n_points', 't'), {
        **PROFILE_FIELDS,
        'alpha': check_alpha,
        'x_max': lambda name, value: check_number(name, value, 0, strict=True),
        'n_points': check_positive_int,
        't': lambda name, value: check_number(name, value, 0),
        'method': check_choice('exact', 'fd', 'both'),
        'n_steps': check_positive_int,
        'courant': lambda name, value: check_number(name, value, 0, strict=True),
        'residual': check_bool,
    }),
    'properties': ((), {
        'cases': check_case_names,
    }),
}


# ---------------------------------------------------------------------------
# Job spec
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class JobSpec:
    command: str
    parameters: Dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> str:
        """Byte-normalized JSON: sorted keys, no insignificant whitespace."""
        return json.dumps({'command': self.command, **self.parameters},
                          sort_keys=True, separators=(',', ':'), ensure_ascii=False)

    def get(self, name: str, default: Any = None) -> Any:
        return self.parameters.get(name, default)


def parse_spec(data: bytes, command: Optional[str] = None) -> JobSpec:
    """Decode and validate a JSON job spec; ``command`` comes from the CLI when given."""
    try:
        document = json.loads(data.decode('utf-8')) if data.strip() else {}
    except UnicodeDecodeError as e:
        raise SchemaError(f"spec is not UTF-8: {e}")
    except json.JSONDecodeError as e:
        raise SchemaError(f"spec is not valid JSON: {e}")
    if not isinstance(document, dict):
        raise SchemaError("spec must be a JSON object")

    declared = document.pop('command', None)
    if command and declared and command != declared:
        raise SchemaError(f"command: spec says {declared!r} but {command!r} was requested")
    command = command or declared
    if command not in SCHEMA:
        raise SchemaError(f"command must be one of {', '.join(COMMANDS)}, got {command!r}")

    required, validators = SCHEMA[command]
    for name in required:
        if name not in document:
            raise SchemaError(f"{name} is required for {command}")
    for name, value in document.items():
        validator = validators.get(name)
        if validator is None:
            raise SchemaError(f"{name} is not a field of {command}")
        validator(name, value)

    if 'profile' in document:
        _, _, needed = PROFILES[document['profile'].lower()]
        missing = [name for name in needed if name != 'alpha' and name not in document]
        if missing:
            raise SchemaError(f"{missing[0]} is required for profile '{document['profile']}'")
    return JobSpec(command, document)


# ---------------------------------------------------------------------------
# Result report
# ---------------------------------------------------------------------------

def format_number(value: float) -> str:
    """Shortest decimal that round-trips the binary64 value."""
    return repr(float(value))


def _csv_cell(value: Any) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, str):
        return value
    return format_number(value)


def _json_cell(value: Any) -> Any:
    if isinstance(value, (bool, str)):
        return value
    value = float(value)
    return value if math.isfinite(value) else None


@dataclass
class ResultTable:
    header: List[str]
    rows: List[List[Any]]

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(self.header)
        for row in self.rows:
            writer.writerow([_csv_cell(v) for v in row])
        return buffer.getvalue()

    def to_dict(self) -> Dict:
        return {'header': self.header, 'rows': [[_json_cell(v) for v in row] for row in self.rows]}


@dataclass
class ResultReport:
    command: str
    scalars: Dict[str, Any] = field(default_factory=dict)
    table: Optional[ResultTable] = None
    residuals: Dict[str, float] = field(default_factory=dict)
    checks: Dict[str, bool] = field(default_factory=dict)
    cases: List[Dict] = field(default_factory=list)
    timing: Optional[Dict[str, float]] = None

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> Dict:
        record: Dict[str, Any] = {'command': self.command}
        for name in ('scalars', 'residuals', 'checks', 'cases', 'timing'):
            value = getattr(self, name)
            if value:
                record[name] = value
        if self.table is not None:
            record['table'] = self.table.to_dict()
        return record

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        if self.table is not None:
            return self.table.to_csv()
        names = sorted(name for name, value in self.scalars.items() if _is_number(value))
        return ResultTable(names, [[self.scalars[name] for name in names]]).to_csv()


def error_record(command: Optional[str], error: Exception, exit_code: int) -> str:
    return json.dumps({
        'command': command,
        'error': {'type': type(error).__name__, 'message': str(error), 'exit_code': exit_code},
    }, sort_keys=True) + "\n"


def exit_code_for(error: Exception) -> int:
    if isinstance(error, SchemaError):
        return EXIT_SCHEMA
    if isinstance(error, DomainError):
        return EXIT_DOMAIN
    if not isinstance(error, NumericalError):
        logger.debug(f"unclassified {type(error).__name__} reported as a numerical failure")
    return EXIT_NUMERICAL


# ---------------------------------------------------------------------------
# Command handlers
# ---------------------------------------------------------------------------

def _profile_from(spec: JobSpec):
    params = {name: spec.get(name) for name in PROFILE_FIELDS if name != 'profile' and name in spec.parameters}
    return get_profile(spec.get('profile'), alpha=spec.get('alpha'), **params)


def _trajectory_table(times: Sequence[float], states: np.ndarray) -> ResultTable:
    header = ['t'] + [f"u_{i + 1}" for i in range(states.shape[1])]
    return ResultTable(header, [[t, *state] for t, state in zip(times, states)])


def run_deriv(spec: JobSpec, workers: int) -> ResultReport:
    f = _profile_from(spec)
    t = spec.get('t')
    if t == 0:
        result = conformable_derivative_at_zero(f, spec.get('alpha'), b=spec.get('b'))
    else:
        result = conformable_derivative(f, t, spec.get('alpha'), method=spec.get('method', 'identity'))
    return ResultReport(spec.command, scalars={
        'value': float(result.value),
        'step_used': result.step_used,
        'estimated_error': result.estimated_error,
    })


def run_integrate(spec: JobSpec, workers: int) -> ResultReport:
    value = fractional_integral(_profile_from(spec), spec.get('a', 0.0), spec.get('t'), spec.get('alpha'),
                                method=spec.get('method', 'substitution'))
    return ResultReport(spec.command, scalars={'value': value})


def run_semigroup_check(spec: JobSpec, workers: int) -> ResultReport:
    semigroup = AlphaSemigroup(spec.get('A'), spec.get('alpha'))
    times = spec.get('times', DEFAULT_CHECK_TIMES)
    report = ResultReport(spec.command)

    rows = []
    worst_ratio = 0.0
    for s in times:
        for t in times:
            residual = semigroup_law_residual(semigroup, s, t)
            tolerance = semigroup_law_tolerance(semigroup, s, t)
            worst_ratio = max(worst_ratio, residual / tolerance)
            rows.append([s, t, residual])
    report.table = ResultTable(['s', 't', 'residual'], rows)
    report.residuals['semigroup_law'] = max(row[2] for row in rows)
    report.checks['identity_at_zero'] = bool(np.array_equal(semigroup_evaluate(semigroup, 0.0),
                                                            np.eye(semigroup.dimension)))
    report.checks['semigroup_law'] = worst_ratio <= 1.0

    if spec.get('x') is not None:
        x = spec.get('x')
        norm_x = float(np.linalg.norm(x))
        positive = [t for t in times if t > 0]
        if positive:
            worst = 0.0
            within = True
            for t in positive:
                residual = max(commutation_residual(semigroup, t, x))
                worst = max(worst, residual)
                within = within and residual <= 1e-5 * norm_x * semigroup.growth_factor(t)
            report.residuals['commutation'] = worst
            report.checks['commutation'] = within
        profile = strong_continuity_profile(semigroup, x)
        report.scalars['continuity_profile'] = profile.tolist()
        report.checks['strong_continuity'] = bool(np.all(np.diff(profile) <= 0))
    return report


def run_gen_estimate(spec: JobSpec, workers: int) -> ResultReport:
    semigroup = AlphaSemigroup(spec.get('A'), spec.get('alpha'))
    estimate = estimate_generator(semigroup, probes=spec.get('probes'), b=spec.get('b'))
    error = float(np.linalg.norm(estimate - semigroup.generator))
    tolerance = 1e-3 * max(1.0, float(np.linalg.norm(semigroup.generator)))
    header = [f"col_{j + 1}" for j in range(semigroup.dimension)]
    return ResultReport(
        spec.command,
        scalars={'tolerance': tolerance},
        table=ResultTable(header, estimate.tolist()),
        residuals={'frobenius_error': error},
        checks={'generator_round_trip': error <= tolerance},
    )


def run_solve_cauchy(spec: JobSpec, workers: int) -> ResultReport:
    times = spec.get('times')
    problem = CauchyProblem(spec.get('A'), spec.get('u0'), spec.get('alpha'), times[-1] or 1.0)
    method = spec.get('method', 'exact')
    report = ResultReport(spec.command)

    if method in ('exact', 'both'):
        trajectory = solve_exact(problem, times, workers=workers)
        report.table = _trajectory_table(trajectory.times, trajectory.states)
    if method in ('numeric', 'both'):
        n_steps = spec.get('n_steps', DEFAULT_RK_STEPS)
        numeric = solve_numeric(problem, n_steps)
        report.scalars['n_steps'] = n_steps
        if method == 'numeric':
            trajectory = numeric
            report.table = _trajectory_table(numeric.times, numeric.states)
        else:
            reference = solve_exact(problem, numeric.times, workers=workers)
            report.residuals['max_gap'] = float(np.max(np.abs(numeric.states - reference.states)))
    if spec.get('residual'):
        report.residuals['residual'] = residual_check(problem, trajectory)
    return report


def run_solve_transport(spec: JobSpec, workers: int) -> ResultReport:
    t = spec.get('t')
    grid = Grid1D(spec.get('x_max'), spec.get('n_points'))
    problem = TransportProblem(_profile_from(spec), spec.get('alpha'), grid, t or 1.0)
    method = spec.get('method', 'exact')
    report = ResultReport(spec.command)

    exact = solve_transport_exact(problem, t) if method in ('exact', 'both') else None
    solution = exact
    if method in ('fd', 'both'):
        n_steps = spec.get('n_steps') or cfl_steps(problem, t, spec.get('courant', DEFAULT_COURANT))
        solution = solve_transport_fd(problem, t, n_steps)
        report.scalars['n_steps'] = n_steps
        if exact is not None:
            report.residuals['max_gap'] = solution.max_gap(exact)
    report.table = ResultTable(['x', 'u'], [[x, u] for x, u in zip(grid.points, solution.values)])
    if spec.get('residual') and t > 0:
        report.residuals['pde_residual'] = pde_residual(problem, t)
    return report


def run_properties_command(spec: JobSpec, workers: int) -> ResultReport:
    results = run_properties(workers=workers, seed=SUITE_SEED, names=spec.get('cases'), logger=logger)
    report = ResultReport(spec.command)
    report.cases = [r.to_dict() for r in results]
    report.checks = {r.name: r.passed for r in results}
    report.table = ResultTable(
        ['case', 'passed', 'checks', 'worst_ratio'],
        [[r.name, r.passed, r.checks, r.worst_ratio] for r in results],
    )
    if RICH_LIVE_OK:
        table = RichTable(title=f"Property suites (seed {SUITE_SEED})")
        table.add_column("Case", style="cyan", no_wrap=True)
        table.add_column("Result")
        table.add_column("Checks", justify="right")
        table.add_column("Worst ratio", justify="right", style="yellow")
        for r in results:
            verdict = "[green]pass[/green]" if r.passed else "[red]FAIL[/red]"
            table.add_row(r.name, verdict, str(r.checks), f"{r.worst_ratio:.3g}")
        console.print(table)
    return report


HANDLERS: Dict[str, Callable[[JobSpec, int], ResultReport]] = {
    'deriv': run_deriv,
    'integrate': run_integrate,
    'semigroup-check': run_semigroup_check,
    'gen-estimate': run_gen_estimate,
    'solve-cauchy': run_solve_cauchy,
    'solve-transport': run_solve_transport,
    'properties': run_properties_command,
}


def run(spec: JobSpec, workers: int = DEFAULT_WORKERS, timing: bool = False) -> ResultReport:
    """Execute one job. Library errors are re-raised with the command name prefixed."""
    started = time.perf_counter()
    logger.info(f"Running {spec.command}")
    try:
        report = HANDLERS[spec.command](spec, workers)
    except FracSemiError as e:
        raise type(e)(f"{spec.command}: {e}") from e
    if timing:
        report.timing = {
            'wall_time_s': time.perf_counter() - started,
            'rss_mb': psutil.Process().memory_info().rss / 1024 / 1024,
        }
    return report


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def setup_logging(verbose: bool = False, log_file: Optional[str] = None) -> logging.Logger:
    """Configure the root logger on stderr (rich when interactive) plus an optional file."""
    root = logging.getLogger()
    root.setLevel(logging.DEBUG if verbose else logging.INFO)
    root.handlers.clear()

    log_format = logging.Formatter(LOG_FORMAT)
    if RICH_LIVE_OK:
        console_handler = RichHandler(console=console, show_time=True, show_path=False)
        console_handler.setFormatter(logging.Formatter('%(message)s'))
    else:
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(log_format)
    root.addHandler(console_handler)

    if log_file:
        file_handler = logging.FileHandler(log_file)
        file_handler.setFormatter(log_format)
        root.addHandler(file_handler)
    return logger


def _read_spec(path: Optional[str]) -> bytes:
    if path is None:
        return b""
    if path == '-':
        return sys.stdin.buffer.read()
    try:
        with open(path, 'rb') as f:
            return f.read()
    except OSError as e:
        raise SchemaError(f"spec: cannot read {path}: {e.strerror}")


def _emit(payload: str, out: Optional[str]):
    if out:
        with open(out, 'w', encoding='utf-8', newline='') as f:
            f.write(payload)
        logger.info(f"Wrote {out}")
    else:
        sys.stdout.write(payload)
        sys.stdout.flush()


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(description="FracSemi: conformable fractional calculus and alpha-semigroups")
    parser.add_argument("command", choices=COMMANDS, help="Job to run")
    parser.add_argument("--spec", help="JSON job spec ('-' reads stdin; optional for properties)")
    parser.add_argument("--out", help="Write the result here instead of stdout")
    parser.add_argument("--format", choices=FORMATS, default='json', help="Result format (default: json)")
    parser.add_argument("--workers", type=int, default=DEFAULT_WORKERS,
                        help=f"Thread count for properties and trajectory sampling (default: {DEFAULT_WORKERS})")
    parser.add_argument("--timing", action="store_true", help="Add wall time and resident memory to the report")
    parser.add_argument("--verbose", action="store_true", help="Detailed logging")
    parser.add_argument("--log-file", help="Also write the log to this file")

    args = parser.parse_args(argv)
    setup_logging(args.verbose, args.log_file)

    try:
        if args.spec is None and args.command != 'properties':
            raise SchemaError("--spec is required for " + args.command)
        spec = parse_spec(_read_spec(args.spec), args.command)
        report = run(spec, workers=max(1, args.workers), timing=args.timing)
    except FracSemiError as e:
        code = exit_code_for(e)
        logger.error(str(e))
        sys.stdout.write(error_record(args.command, e, code))
        return code

    _emit(report.to_csv() if args.format == 'csv' else report.to_json(), args.out)
    if not report.passed:
        failed = [name for name, ok in report.checks.items() if not ok]
        logger.error(f"Failed checks: {', '.join(failed)}")
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
