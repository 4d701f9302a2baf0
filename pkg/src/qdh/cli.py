"""Command-line harness emitting the tables behind each reported result.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 I/O error.
"""

from __future__ import annotations

import functools
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click

from . import __version__
from .adversary import AttackConfig, analyze_attack, pns_double_multiphoton_bound, simulate_attacked_sessions
from .channel import DEFAULT_ALPHA_DB_PER_KM, DEFAULT_DIFFUSION, ChannelParams
from .errors import ConfigError, NumericalError
from .keyrate import DEFAULT_P_MAX_ERR, abort_decision, chernoff_sample_size, key_length, min_entropy
from .output import Table, emit, metadata
from .protocol import SessionConfig, marginal_stats, simulate_sessions
from .qowf import DEFAULT_EPSILON, qowf_report
from .seeding import derive_seed
from .states import SetParams, make_set, validate_set_params

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

TABLE1_PAIRS = ((0.01, 20), (0.02, 20), (0.05, 30), (0.1, 40))


def _load_config(ctx: click.Context, param: click.Parameter, value):
    """Eager ``--config`` callback: file values become parameter defaults."""
    if value is None:
        return None
    try:
        data = json.loads(Path(value).read_text(encoding="utf-8"))
    except OSError as exc:
        ctx.fail(f"cannot read config file {value}: {exc.strerror}")
    except json.JSONDecodeError as exc:
        ctx.fail(f"config file {value} is not valid JSON: {exc}")
    if not isinstance(data, dict):
        ctx.fail(f"config file {value} must hold a JSON object")
    # keys follow the long flag names: "n-states" or "n_states" for --n-states
    aliases = {}
    for p in ctx.command.params:
        if p.name == "config":
            continue
        for opt in p.opts:
            aliases[opt.lstrip("-").replace("-", "_")] = p.name
    normalised = {}
    for key, v in data.items():
        name = aliases.get(str(key).replace("-", "_"))
        if name is None:
            ctx.fail(f"unknown key {key!r} in config file {value}")
        normalised[name] = v
    ctx.default_map = {**(ctx.default_map or {}), **normalised}
    return value


def common_options(f):
    f = click.option("--config", type=click.Path(dir_okay=False), is_eager=True, expose_value=False,
                     callback=_load_config, help="JSON file of parameter values; flags override it.")(f)
    f = click.option("--workers", type=click.IntRange(1), default=1, show_default=True,
                     help="Threads for independent sweep cells (never changes results).")(f)
    f = click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)(f)
    f = click.option("--out", type=click.Path(dir_okay=False), default=None,
                     help="Output file [default: <command>.<format>].")(f)
    f = click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0, show_default=True)(f)
    return f


def handle_errors(f):
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except ConfigError as exc:
            click.echo(f"Error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
        except NumericalError as exc:
            click.echo(f"Numerical failure: {exc}", err=True)
            sys.exit(EXIT_NUMERICAL)
        except OSError as exc:
            click.echo(f"I/O error: {exc}", err=True)
            sys.exit(EXIT_IO)
    return wrapper


def _finish(command: str, table: Table, params: dict):
    fmt = params["fmt"]
    out = params["out"] or f"{command}.{fmt}"
    config = {k: v for k, v in params.items() if k not in ("out", "workers")}
    config["format"] = config.pop("fmt")
    paths = emit(table, out, fmt, metadata(command, config, params["seed"]))
    click.echo(f"wrote {paths[0]} ({len(table.rows)} rows) and {paths[1]}", err=True)


def parse_lengths(text: str) -> list[float]:
    """``"start:stop:step"`` (stop inclusive) or a comma-separated list, in km."""
    text = str(text).strip()
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0 or stop < start:
                raise ConfigError(f"bad length range {text!r}")
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [start + i * step for i in range(n)]
        return sorted(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise ConfigError(f"cannot parse lengths {text!r}") from exc


def _map(fn, items, workers):
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


@click.group()
@click.version_option(__version__, prog_name="qdh")
def main():
    """Quantum Diffie-Hellman key exchange with symmetric coherent states."""


@main.command("qowf-scan")
@click.option("--mu", "mu_list", type=float, multiple=True, default=(0.01, 0.02, 0.05, 0.1), show_default=True)
@click.option("--n-min", type=int, default=6, show_default=True)
@click.option("--n-max", type=int, default=60, show_default=True)
@click.option("--epsilon", type=float, default=DEFAULT_EPSILON, show_default=True)
@common_options
@handle_errors
def qowf_scan(**params):
    """Holevo information, SRM error and D ratio over an even-N grid."""
    mu_list = sorted(set(params["mu_list"]))
    if params["n_min"] > params["n_max"]:
        raise ConfigError("--n-min must not exceed --n-max")
    n_values = [n for n in range(params["n_min"], params["n_max"] + 1) if n % 2 == 0 and n > 4]
    cells = [(mu, n) for mu in mu_list for n in n_values]
    reports = _map(lambda c: qowf_report(make_set(*c), params["epsilon"]), cells, params["workers"])
    table = Table(("mu", "N", "chi", "p_err_min", "D", "gain", "n_star_flag"))
    for mu in mu_list:
        rows = [r for r in reports if r.mu == mu]
        for r0, r1 in zip(rows, rows[1:]):
            if r1.d_ratio > r0.d_ratio + 1e-10:
                raise NumericalError(f"D increases from N={r0.n_states} to N={r1.n_states} at mu={mu}")
        n_star = next((r.n_states for r in rows if r.is_qowf), None)
        for r in rows:
            table.add(mu, r.n_states, r.chi, r.p_err_min, r.d_ratio, r.gain, r.n_states == n_star)
    _finish("qowf-scan", table, {**params, "mu_list": mu_list})


@main.command("table1")
@common_options
@handle_errors
def table1(**params):
    """Entropies, information gain and Holevo bound for the reference (mu, N) pairs."""
    reports = _map(lambda c: qowf_report(make_set(*c)), TABLE1_PAIRS, params["workers"])
    table = Table(("mu", "N", "H_x", "H_x_given_y", "gain", "chi"))
    for r in reports:
        table.add(r.mu, r.n_states, r.h_x, r.h_x_given_y, r.gain, r.chi)
    _finish("table1", table, params)


@main.command("protocol-sim")
@click.option("--mu", type=float, default=0.02, show_default=True)
@click.option("--n-states", type=int, default=20, show_default=True)
@click.option("--lengths", default="0:200:10", show_default=True, help="km; start:stop:step or a comma list.")
@click.option("--eta-d", type=float, default=0.5, show_default=True)
@click.option("--diffusion", type=float, default=DEFAULT_DIFFUSION, show_default=True, help="rad^2/km")
@click.option("--alpha", type=float, default=DEFAULT_ALPHA_DB_PER_KM, show_default=True, help="dB/km")
@click.option("--sessions", type=click.IntRange(0), default=0, show_default=True,
              help="Monte Carlo rounds per length (0: analytic rows only).")
@click.option("--partitions", type=click.IntRange(1), default=1, show_default=True)
@common_options
@handle_errors
def protocol_sim(**params):
    """Detection rates versus fiber length, quadrature and optionally Monte Carlo."""
    lengths = parse_lengths(params["lengths"])
    sp = SetParams(params["mu"], params["n_states"])
    validate_set_params(*sp)

    def cell(item):
        i, length = item
        ch = ChannelParams(length, params["eta_d"], params["alpha"], params["diffusion"])
        rows = [(length, marginal_stats(sp, ch), "analytic")]
        if params["sessions"]:
            cfg = SessionConfig(sp, ch, params["sessions"], derive_seed(params["seed"], i), params["partitions"])
            rows.append((length, simulate_sessions(cfg)[1], "montecarlo"))
        return rows

    table = Table(("L", "p_cor", "p_inc", "p_err", "p_cor_sift", "p_err_sift", "source"))
    for rows in _map(cell, list(enumerate(lengths)), params["workers"]):
        for length, st, source in rows:
            table.add(length, st.p_cor, st.p_inc, st.p_err, st.p_cor_sifted, st.p_err_sifted, source)
    _finish("protocol-sim", table, params)


@main.command("attack-sim")
@click.option("--mu", "mu_list", type=float, multiple=True,
              default=(0.01, 0.02, 0.03, 0.05, 0.07, 0.1), show_default=True)
@click.option("--n-states", type=int, default=20, show_default=True)
@click.option("--eta-d", type=float, default=0.3, show_default=True)
@click.option("--sessions", type=click.IntRange(0), default=0, show_default=True,
              help="Monte Carlo rounds per mu (0: analytic rows only).")
@click.option("--partitions", type=click.IntRange(1), default=1, show_default=True)
@common_options
@handle_errors
def attack_sim(**params):
    """Eve's bit statistics, min-entropy and induced sifted error rates versus mu."""
    mu_list = sorted(set(params["mu_list"]))

    def cell(item):
        i, mu = item
        sset = make_set(mu, params["n_states"])
        rows = [(mu, analyze_attack(sset, eta_d=params["eta_d"]), "analytic")]
        if params["sessions"]:
            cfg = AttackConfig(mu, params["n_states"], params["eta_d"], seed=derive_seed(params["seed"], i),
                               partitions=params["partitions"])
            rows.append((mu, simulate_attacked_sessions(cfg, params["sessions"], sset=sset)[1], "montecarlo"))
        return rows

    table = Table(("mu", "p_stilde0_given_s0", "p_stilde1_given_s0", "p_e_cor", "h_min",
                   "p_err_sift_ab", "p_cor_sift_ab", "source"))
    for rows in _map(cell, list(enumerate(mu_list)), params["workers"]):
        for mu, d, source in rows:
            table.add(mu, float(d.p_s_given_s[0, 0]), float(d.p_s_given_s[0, 1]), d.p_e_cor,
                      min_entropy(d.p_e_cor), d.p_err_sifted, d.p_cor_sifted, source)
    _finish("attack-sim", table, {**params, "mu_list": mu_list})


@main.command("keyrate")
@click.option("--epsilon-sample", type=float, default=2e-2, show_default=True)
@click.option("--xi", type=float, default=1e-6, show_default=True)
@click.option("--q", type=float, default=None, help="Observed test error rate (omit to skip the abort rule).")
@click.option("--p-max-err", type=float, default=DEFAULT_P_MAX_ERR, show_default=True)
@click.option("--sifted-bits", type=click.IntRange(0), default=1_000_000, show_default=True)
@click.option("--test-bits", type=click.IntRange(0), default=None,
              help="Bits sacrificed for error estimation [default: Chernoff sample size].")
@click.option("--h-min", type=float, default=None, help="Min-entropy per bit [default: MED attack at --mu].")
@click.option("--mu", type=float, default=0.02, show_default=True)
@click.option("--n-states", type=int, default=20, show_default=True)
@click.option("--leak", type=float, default=0.0, show_default=True)
@click.option("--delta", type=float, default=1e-9, show_default=True)
@common_options
@handle_errors
def keyrate(**params):
    """Test-sample size, abort decision and extractable key length."""
    m_th = chernoff_sample_size(params["epsilon_sample"], params["xi"])
    test_bits = m_th if params["test_bits"] is None else params["test_bits"]
    if test_bits > params["sifted_bits"]:
        raise ConfigError(f"test sample ({test_bits}) exceeds the sifted bits ({params['sifted_bits']})")
    s_len = params["sifted_bits"] - test_bits
    h_min = params["h_min"]
    if h_min is None:
        h_min = min_entropy(analyze_attack(make_set(params["mu"], params["n_states"])).p_e_cor)
    decision = ""
    if params["q"] is not None:
        decision = abort_decision(params["q"], params["epsilon_sample"], params["p_max_err"]).value
    ell = key_length(s_len, h_min, params["leak"], params["delta"])
    table = Table(("epsilon_sample", "xi", "m_th", "test_bits", "q", "decision", "s_len", "h_min",
                   "leak", "delta", "ell"))
    table.add(params["epsilon_sample"], params["xi"], m_th, test_bits, params["q"], decision, s_len,
              float(h_min), float(params["leak"]), params["delta"], ell)
    _finish("keyrate", table, params)


@main.command("pns")
@click.option("--mu", "mu_list", type=float, multiple=True, default=(0.01, 0.02, 0.05, 0.1), show_default=True)
@common_options
@handle_errors
def pns(**params):
    """Probability that both exchanged pulses are multiphoton: bound and exact value."""
    mu_list = sorted(set(params["mu_list"]))
    table = Table(("mu", "bound", "exact"))
    for mu in mu_list:
        b = pns_double_multiphoton_bound(mu)
        table.add(mu, b.bound, b.exact)
    _finish("pns", table, {**params, "mu_list": mu_list})


if __name__ == "__main__":
    main()
