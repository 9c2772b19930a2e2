import math
import subprocess
import time

import numpy as np
import pytest

from kwbandit import ConfigError, DomainError, EstimationError
from kwbandit.harness import (
    EnvSpec,
    ExperimentConfig,
    default_checkpoints,
    emit_csv,
    emit_summary,
    estimate_exponent,
    lemma4_check,
    lemma4_lambda,
    parse_config,
    read_csv,
    read_summary,
    recursion_coefficients,
    run_experiment,
    run_trial,
    splitmix64,
    trial_rng,
    trial_seed,
)
from kwbandit.harness.analysis import _recursion_within_bound
from kwbandit.harness.runner import RegretTrace

# ---------------------------------------------------------------- oracles


def replay_kwsa(d_x, d_y, T, K, q, center, amplitude, sigma, a, delta, seed):
    """Straight-line KWSA-with-binning loop on an affine quadratic, plain floats."""
    rng = np.random.Generator(np.random.PCG64(seed))
    X = rng.random((T, d_x)).tolist()
    noise = (sigma * rng.standard_normal(T)).tolist() if sigma > 0 else [0.0] * T
    bins = {}
    R, trace = 0.0, []
    for t in range(T):
        x = X[t]
        b = 0
        for u in x:
            b = b * K + min(int(u * K), K - 1)
        st = bins.setdefault(b, {"y": [0.5] * d_y, "n": 1, "phase": 0, "z0": 0.0, "diffs": [], "signs": []})
        y = st["y"]
        if st["phase"] == 0:
            arm = list(y)
        else:
            i = st["phase"] - 1
            c = delta * st["n"] ** -0.25
            arm = list(y)
            if y[i] + c <= 1.0:
                arm[i] = y[i] + c
                st["signs"].append(1.0)
            else:
                arm[i] = y[i] - c
                st["signs"].append(-1.0)
        peak = [center[i] + amplitude[i] * (x[i % d_x] if d_x else 0.0) for i in range(d_y)]
        g = 0.5 * sum(q[i] * (arm[i] - peak[i]) ** 2 for i in range(d_y))
        z = 1.0 - g + noise[t]
        R += g
        trace.append(R)
        if st["phase"] == 0:
            st["z0"] = z
            st["phase"] = 1
            continue
        st["diffs"].append(st["signs"][-1] * (z - st["z0"]))
        if st["phase"] < d_y:
            st["phase"] += 1
            continue
        c = delta * st["n"] ** -0.25
        step = a / st["n"]
        st["y"] = [min(max(y[i] + step * (st["diffs"][i] / c), 0.0), 1.0) for i in range(d_y)]
        st.update(n=st["n"] + 1, phase=0, diffs=[], signs=[])
    return trace


def config(**kw):
    env = kw.pop("environment", EnvSpec(q=(1.0,), center=(0.62,), noise_sigma=0.0))
    base = dict(d_x=0, d_y=1, T=500, trials=1, master_seed=3, environment=env)
    base.update(kw)
    return ExperimentConfig(**base)


# ---------------------------------------------------------------- seeding


class TestSeeding:
    def test_splitmix_reference_value(self):
        assert splitmix64(0) == 0xE220A8397B1DCDAF

    def test_trial_seed_formula(self):
        assert trial_seed(5, 2) == splitmix64(5 ^ splitmix64(2))
        assert len({trial_seed(0, i) for i in range(1000)}) == 1000

    def test_rng_streams(self):
        a = trial_rng(7, 1).random(5)
        b = trial_rng(7, 1).random(5)
        c = trial_rng(7, 2).random(5)
        assert a.tobytes() == b.tobytes() and a.tobytes() != c.tobytes()


# ---------------------------------------------------------------- trial loop


class TestRunTrial:
    def test_noiseless_context_free_matches_replay(self):
        cfg = config(T=3000, checkpoints=tuple(range(1, 3001)))
        trace = run_trial(cfg, 0)
        expected = replay_kwsa(0, 1, 3000, 1, [1.0], [0.62], [0.0], 0.0, 0.375, 0.2, trial_seed(3, 0))
        assert trace.cumulative_regret.tolist() == expected
        assert np.all(np.isfinite(trace.cumulative_regret))
        assert trace.final_regret / 3000 < 1e-3

    def test_noisy_contextual_matches_replay(self):
        env = EnvSpec(q=(1.0, 2.0), center=(0.3, 0.6), amplitude=(0.4, -0.3), noise_sigma=0.2)
        cfg = ExperimentConfig(
            d_x=2, d_y=2, T=4000, master_seed=11, environment=env, K_override=3, checkpoints=tuple(range(1, 4001))
        )
        trace = run_trial(cfg, 4)
        expected = replay_kwsa(
            2, 2, 4000, 3, [1.0, 2.0], [0.3, 0.6], [0.4, -0.3], 0.2, 0.375, 0.2, trial_seed(11, 4)
        )
        np.testing.assert_allclose(trace.cumulative_regret, expected, rtol=1e-12, atol=0)

    def test_single_epoch(self):
        cfg = config(T=1)
        trace = run_trial(cfg, 0)
        env = cfg.build_env()
        assert trace.checkpoints.tolist() == [1]
        assert trace.final_regret == env.instant_regret((), (0.5,))

    def test_deterministic(self):
        env = EnvSpec(q=(1.0, 1.0), center=(0.4, 0.6), amplitude=(0.3, 0.2))
        cfg = ExperimentConfig(d_x=1, d_y=2, T=2000, trials=2, master_seed=9, environment=env)
        a, b = run_trial(cfg, 1), run_trial(cfg, 1)
        assert a.cumulative_regret.tobytes() == b.cumulative_regret.tobytes()
        assert {k: v.tobytes() for k, v in a.final_iterates.items()} == {
            k: v.tobytes() for k, v in b.final_iterates.items()
        }
        assert run_trial(cfg, 0).cumulative_regret.tobytes() != a.cumulative_regret.tobytes()

    def test_visits_sum_to_T(self):
        env = EnvSpec(q=(1.0,), center=(0.5,), amplitude=(0.3,))
        cfg = ExperimentConfig(d_x=2, d_y=1, T=1500, environment=env, K_override=4)
        tr = run_trial(cfg, 0)
        assert sum(tr.bin_visits.values()) == 1500
        assert len(tr.bin_visits) <= 16

    def test_ucb_runs(self):
        tr = run_trial(config(algorithm="discretized_ucb", T=1000), 0)
        assert tr.final_regret > 0 and sum(tr.bin_visits.values()) == 1000

    def test_iterate_tracking(self):
        cfg = config(T=400)
        tr = run_trial(cfg, 0, track_bin=0)
        assert len(tr.iterate_errors) == 201  # 200 completed cycles plus the start
        assert tr.iterate_errors[0] == pytest.approx((0.5 - 0.62) ** 2)

    def test_experiment_ordered_and_parallel_equal(self):
        cfg = config(trials=3, T=300, environment=EnvSpec(q=(1.0,), center=(0.4,), noise_sigma=0.1))
        serial = run_experiment(cfg)
        parallel = run_experiment(cfg, workers=2)
        assert [t.trial for t in serial] == [0, 1, 2]
        for s, p in zip(serial, parallel):
            assert s.cumulative_regret.tobytes() == p.cumulative_regret.tobytes()

    def test_linear_runtime(self):
        env = EnvSpec(q=(1.0, 1.0), center=(0.4, 0.6), amplitude=(0.2, 0.2))

        def timed(T):
            cfg = ExperimentConfig(d_x=1, d_y=2, T=T, environment=env)
            run_trial(cfg, 0)
            start = time.perf_counter()
            run_trial(cfg, 0)
            return time.perf_counter() - start

        ratio = timed(80_000) / timed(20_000)
        assert 4 / 3 <= ratio <= 12


def test_regret_monotone_and_nonnegative_many_trials():
    env = EnvSpec(q=(1.0, 3.0), center=(0.4, 0.5), amplitude=(0.3, -0.3), noise_sigma=0.5)
    cfg = ExperimentConfig(
        d_x=1, d_y=2, T=1000, trials=100, master_seed=2, environment=env, checkpoints=tuple(range(1, 1001))
    )
    for tr in run_experiment(cfg):
        R = tr.cumulative_regret
        assert R[0] >= 0 and np.all(np.diff(R) >= 0)


# ---------------------------------------------------------------- config


class TestConfig:
    TEXT = """
        # a comment
        experiment.d_x = 1
        experiment.d_y = 2
        experiment.T = 100000
        experiment.trials = 10
        experiment.master_seed = 7
        experiment.algorithm = kwsa_binning
        policy.delta = 0.2
        environment.q = 1.0, 1.0
        environment.center = 0.3, 0.7
        environment.amplitude = 0.4, -0.4
        environment.noise_sigma = 0.1
    """

    def test_parse(self):
        cfg = parse_config(self.TEXT)
        assert (cfg.d_x, cfg.d_y, cfg.T, cfg.trials, cfg.master_seed) == (1, 2, 100000, 10, 7)
        assert cfg.environment.amplitude == (0.4, -0.4)
        assert cfg.K_override is None

    def test_round_trip(self):
        cfg = parse_config(self.TEXT).with_(K_override=5, a_override=0.3)
        assert parse_config(cfg.to_text()) == cfg

    def test_hash_is_git_blob(self):
        cfg = parse_config(self.TEXT)
        git = subprocess.run(
            ["git", "hash-object", "--stdin"], input=cfg.to_text().encode(), capture_output=True, check=True
        )
        assert cfg.content_hash() == git.stdout.decode().strip()

    @pytest.mark.parametrize(
        "extra",
        ["experiment.colour = red", "experiment.T = 5", "policy.delta = abc", "just words", "environment.phi = spline"],
    )
    def test_bad_lines(self, extra):
        with pytest.raises(ConfigError):
            parse_config(self.TEXT + "\n" + extra)

    def test_missing_required(self):
        with pytest.raises(ConfigError):
            parse_config("experiment.d_x = 1\nexperiment.d_y = 1\n")

    def test_default_checkpoints(self):
        assert default_checkpoints(100) == (2, 3, 4, 7, 10, 16, 26, 40, 64, 100)
        assert default_checkpoints(1) == (1,)
        assert default_checkpoints(10**6)[4] == 1000

    def test_checkpoint_validation(self):
        with pytest.raises(ConfigError):
            config(T=10, checkpoints=(1, 5, 9))
        with pytest.raises(ConfigError):
            config(T=10, checkpoints=(5, 5, 10))

    def test_env_dimension_mismatch(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(d_x=0, d_y=3, T=10, environment=EnvSpec(q=(1.0, 1.0)))


# ---------------------------------------------------------------- analysis


class TestExponent:
    T = np.array([10, 30, 100, 300, 1000, 3000, 10000, 30000], dtype=float)

    @pytest.mark.parametrize("R, slope", [(lambda t: t ** (2 / 3), 2 / 3), (lambda t: 5 * t**0.5, 0.5), (lambda t: 0 * t + 4, 0.0)])
    def test_power_laws(self, R, slope):
        est, _ = estimate_exponent([R(self.T)], self.T)
        assert est == pytest.approx(slope, abs=1e-9)

    def test_uses_last_six(self):
        R = np.where(self.T < 100, 1.0, self.T**0.5)
        assert estimate_exponent([R], self.T)[0] == pytest.approx(0.5, abs=1e-9)

    def test_drops_zeros(self):
        R = self.T**0.5
        R[3] = 0
        assert estimate_exponent([R], self.T)[0] == pytest.approx(0.5, abs=1e-9)

    def test_too_few_points(self):
        R = np.zeros_like(self.T)
        R[-2:] = 1.0
        with pytest.raises(EstimationError):
            estimate_exponent([R], self.T)

    def test_uses_mean_across_traces(self):
        t = self.T.astype(np.int64)
        traces = [RegretTrace(i, t, (i + 1) * self.T**0.7) for i in range(3)]
        assert estimate_exponent(traces)[0] == pytest.approx(0.7, abs=1e-9)


def recursion_holds(alpha, beta, omega, b1, N):
    k = 2 * alpha - 1
    lam = max(b1, ((beta + math.sqrt(beta**2 + 2 * omega * k)) / k) ** 2)
    b = b1
    if b > lam:
        return False
    for n in range(1, N + 1):
        b = (1 - alpha / n) * b + beta * n**-1.25 * math.sqrt(b) + omega * n**-1.5
        if b > lam / math.sqrt(n + 1):
            return False
    return True


class TestRecursionCheck:
    def test_pure_contraction(self):
        assert lemma4_check(0.75, 0.0, 0.0, 1.0, 10_000)

    def test_reference_case_against_plain_loop(self):
        assert recursion_holds(0.75, 1.0, 1.0, 1.0, 10**6)
        assert lemma4_check(0.75, 1.0, 1.0, 1.0, 10**6)

    def test_domain(self):
        with pytest.raises(DomainError):
            lemma4_check(0.4, 1.0, 1.0, 1.0, 10)
        with pytest.raises(DomainError):
            lemma4_check(0.75, -1.0, 1.0, 1.0, 10)
        with pytest.raises(DomainError):
            lemma4_check(0.75, 1.0, 1.0, 1.0, 0)

    def test_lambda(self):
        assert lemma4_lambda(0.75, 0.0, 0.0, 2.0) == 2.0
        assert lemma4_lambda(0.75, 1.0, 1.0, 0.0) == pytest.approx(((1 + math.sqrt(2)) / 0.5) ** 2)

    def test_kernel_detects_violation(self):
        assert not _recursion_within_bound(0.75, 1.0, 1.0, 1.0, 100, 1.5)
        assert not _recursion_within_bound(0.75, 0.0, 0.0, 2.0, 10, 1.0)

    def test_kernel_agrees_with_plain_loop(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            args = (rng.uniform(0.51, 0.99), rng.uniform(0, 5), rng.uniform(0, 5), rng.uniform(0, 3))
            assert lemma4_check(*args, 2000) == recursion_holds(*args, 2000)

    def test_recursion_coefficients(self):
        al, be, om = recursion_coefficients(0.375, 0.2, 1.0, 9.0, 2.0, 2)
        assert al == 0.75
        assert be == pytest.approx(0.375 * 0.2 * 2.0)
        assert om == pytest.approx(4 * 2 * 0.375**2 * 81 / 0.04)
        assert recursion_coefficients(0.375, 0.2, 1.0, 9.0, 2.0, 2, "alpha")[1] == pytest.approx(0.75 * 0.2 * 2.0)
        with pytest.raises(DomainError):
            recursion_coefficients(0.375, 0.2, 1.0, 9.0, 2.0, 2, "other")


# ---------------------------------------------------------------- output


class TestOutput:
    def trace(self, trial=0):
        return RegretTrace(trial, np.array([1, 10, 100]), np.array([0.1, 1 / 3, math.pi * 1e5]))

    def test_header_only(self, tmp_path):
        emit_csv([], tmp_path / "t.csv")
        assert (tmp_path / "t.csv").read_text() == "trial,checkpoint_t,cumulative_regret\n"

    def test_rows_and_round_trip(self, tmp_path):
        path = emit_csv([self.trace(0), self.trace(1)], tmp_path / "t.csv")
        lines = path.read_text().splitlines()
        assert len(lines) == 7
        back = read_csv(path)
        for k in (0, 1):
            assert back[k][0].tolist() == [1, 10, 100]
            assert back[k][1].tolist() == self.trace().cumulative_regret.tolist()

    def test_overwrite_leaves_no_temp_files(self, tmp_path):
        emit_csv([self.trace()], tmp_path / "t.csv")
        emit_csv([], tmp_path / "t.csv")
        assert [p.name for p in tmp_path.iterdir()] == ["t.csv"]
        assert len((tmp_path / "t.csv").read_text().splitlines()) == 1

    def test_io_error_names_path(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(OSError, match="file"):
            emit_csv([], blocker / "sub" / "t.csv")

    def test_summary(self, tmp_path):
        cfg = config()
        path = emit_summary(cfg, {"slope": 0.5, "stderr": 0.01, "mean_final_regret": 2.5, "trials": 1}, tmp_path / "s.txt")
        s = read_summary(path)
        assert s["slope"] == "0.5" and s["trials"] == "1"
        assert s["config_hash"] == cfg.content_hash()
        assert s["config.experiment.T"] == "500"
        echo = "".join(f"{k[len('config.'):]} = {v}\n" for k, v in s.items() if k.startswith("config."))
        assert parse_config(echo) == cfg

    def test_byte_identical_outputs(self, tmp_path):
        cfg = config(trials=2, environment=EnvSpec(q=(1.0,), center=(0.4,)))
        for name in ("a.csv", "b.csv"):
            emit_csv(run_experiment(cfg), tmp_path / name)
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
