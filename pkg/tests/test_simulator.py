import numpy as np
import pytest
from scipy import stats

import epifrost as ef

from oracles import R_NU_HALF_N50, TAU_MU2, reed_frost_pmf, scalar_tau


def test_zero_kernel_means_no_epidemic():
    spec = ef.PopulationSpec(m=1, pi=[1.0], N=2, a=[1])
    record = ef.run_final_size(spec, ef.constant_kernel([[0.0]]), ef.replicate_rng(0, 0))
    assert record.total == 0
    assert record.generations == 0
    assert record.outbreak_class is ef.OutbreakClass.MINOR


def test_final_size_distribution_matches_enumeration_n2():
    # exhaustive chain enumeration: (0.25, 0.25, 0.5) for N=2, a=1, v=0.5
    pmf = reed_frost_pmf(2, 1, 0.5)
    assert pmf == pytest.approx([0.25, 0.25, 0.5], abs=1e-12)
    spec = ef.PopulationSpec(m=1, pi=[1.0], N=2, a=[1])
    kernel = ef.constant_kernel([[1.0]])  # V = 1/2 at N=2
    counts = np.zeros(3)
    for r in range(20_000):
        counts[ef.run_final_size(spec, kernel, ef.replicate_rng(101, r)).total] += 1
    _, p = stats.chisquare(counts, f_exp=pmf * counts.sum())
    assert p > 0.001


def test_final_size_distribution_matches_enumeration_n3():
    spec = ef.PopulationSpec(m=1, pi=[1.0], N=3, a=[1])
    kernel = ef.constant_kernel([[1.2]])  # V = 0.4 at N=3
    pmf = reed_frost_pmf(3, 1, 0.4)
    counts = np.zeros(4)
    for r in range(20_000):
        counts[ef.run_final_size(spec, kernel, ef.replicate_rng(55, r)).total] += 1
    _, p = stats.chisquare(counts, f_exp=pmf * counts.sum())
    assert p > 0.001


def test_final_size_never_exceeds_susceptibles():
    spec = ef.PopulationSpec(m=2, pi=[0.4, 0.6], N=50, a=[2, 1])
    kernel = ef.static_bernoulli_kernel(ef.StaticGraphSpec(
        alpha=np.array([[5.0, 2.0], [2.0, 4.0]]), w=ef.ScalarDist.bernoulli(0.8)))
    for r in range(200):
        record = ef.run_final_size(spec, kernel, ef.replicate_rng(7, r))
        assert np.all(record.t_inf >= 0)
        assert np.all(record.t_inf <= record.population.n_susceptible)


def test_rerun_with_same_seed_is_bit_identical():
    spec = ef.PopulationSpec(m=1, pi=[1.0], N=500, a=[1])
    kernel = ef.ball_clancy93_kernel(ef.BallClancy93Spec(
        b=np.array([[[2.0]]]), sojourn=[[ef.ScalarDist.exponential(1.0)]]))
    a = ef.run_final_size(spec, kernel, ef.replicate_rng(9, 3))
    b = ef.run_final_size(spec, kernel, ef.replicate_rng(9, 3))
    assert np.array_equal(a.t_inf, b.t_inf)
    assert a.generations == b.generations


def test_ensemble_worker_count_does_not_change_output():
    spec = ef.PopulationSpec(m=1, pi=[1.0], N=200, a=[1])
    kernel = ef.constant_kernel([[2.0]])
    serial = ef.run_ensemble(spec, kernel, 10, seed=42, workers=1)
    threaded = ef.run_ensemble(spec, kernel, 10, seed=42, workers=4)
    assert len(serial) == len(threaded) == 10
    for x, y in zip(serial, threaded):
        assert x.replicate == y.replicate
        assert np.array_equal(x.t_inf, y.t_inf)
        assert x.generations == y.generations


def test_ensemble_zero_kernel_all_empty():
    spec = ef.PopulationSpec(m=1, pi=[1.0], N=100, a=[1])
    records = ef.run_ensemble(spec, ef.constant_kernel([[0.0]]), 100, seed=0)
    assert all(r.total == 0 for r in records)


def test_ensemble_major_fraction_const_mu2(const_mu2_ensemble):
    _, _, records = const_mu2_ensemble
    stats_ = ef.estimate_outbreak_statistics(records)
    assert abs(stats_.major_fraction - (1 - 0.2032)) < 0.02


def test_classify_outbreak_rules():
    pop = ef.ResolvedPopulation(n_susceptible=np.array([10_000]), n_infective=np.array([1]))
    make = lambda total: ef.FinalSizeRecord(
        t_inf=np.array([total]), generations=1,
        outbreak_class=ef.OutbreakClass.MINOR, population=pop)
    assert ef.default_threshold(10_000) == 1000
    assert ef.classify_outbreak(make(3), 1000) is ef.OutbreakClass.MINOR
    assert ef.classify_outbreak(make(7950), 1000) is ef.OutbreakClass.MAJOR
    assert ef.classify_outbreak(make(1000), 1000) is ef.OutbreakClass.MAJOR  # tie -> major
    with pytest.raises(ValueError):
        ef.classify_outbreak(make(3), -1)


def test_weak_lln_error_decreases_with_n():
    # major-conditional |mean final-size fraction - tau| shrinks as N grows
    kernel = ef.constant_kernel([[2.0]])
    tau = scalar_tau(2.0)
    errors = []
    for n in (100, 1000, 10_000):
        spec = ef.PopulationSpec(m=1, pi=[1.0], N=n, a=[1])
        records = ef.run_ensemble(spec, kernel, 2000, seed=321 + n)
        major = [r for r in records if r.outbreak_class is ef.OutbreakClass.MAJOR]
        fractions = np.array([r.total / n for r in major])
        errors.append(abs(np.mean(np.abs(fractions - tau))))
    assert errors[0] > errors[1] > errors[2]
    assert abs(fractions.mean() - TAU_MU2) < 0.01


# ---------------------------------------------------------------------------
# Counting process
# ---------------------------------------------------------------------------


def test_counting_process_zero_exposure():
    spec = ef.PopulationSpec(m=2, pi=[0.5, 0.5], N=20, a=[1, 1])
    kernel = ef.constant_kernel(np.full((2, 2), 2.0))
    snaps = ef.evaluate_counting_process(spec, kernel, [np.zeros(2)],
                                         ef.replicate_rng(0, 0))
    assert np.all(snaps[0].x == 0)


def test_counting_process_certain_infection():
    spec = ef.PopulationSpec(m=1, pi=[1.0], N=10, a=[2])
    kernel = ef.constant_kernel([[10.0]])  # V = 1 at N = 10
    t_max = np.array([(10 + 2) / 10.0])
    snaps = ef.evaluate_counting_process(spec, kernel, [t_max], ef.replicate_rng(1, 0))
    assert snaps[0].x[0] == 10


def test_counting_process_mean_matches_formula():
    # E[X(0.5)]/N = 1 - (1 - 2/N)^floor(0.5 N) at N = 50
    spec = ef.PopulationSpec(m=1, pi=[1.0], N=50, a=[0])
    kernel = ef.constant_kernel([[2.0]])
    level = [np.array([0.5])]
    total = 0
    runs = 4000
    for r in range(runs):
        total += ef.evaluate_counting_process(spec, kernel, level,
                                              ef.replicate_rng(88, r))[0].x[0]
    mean_fraction = total / runs / 50
    se = np.sqrt(R_NU_HALF_N50 * (1 - R_NU_HALF_N50) / (50 * runs))  # crude upper bound
    assert abs(mean_fraction - R_NU_HALF_N50) < 6 * se + 0.005


def test_counting_process_monotone_in_exposure():
    spec = ef.PopulationSpec(m=2, pi=[0.5, 0.5], N=40, a=[2, 2])
    kernel = ef.table_kernel([
        (np.array([[1.0, 2.0], [3.0, 0.5]]), np.array([0.5, 0.5])),
        (np.array([[2.0, 2.0]]), np.array([1.0])),
    ])
    levels = [np.array([0.2, 0.1]), np.array([0.5, 0.4]), np.array([1.0, 0.9])]
    for r in range(50):
        snaps = ef.evaluate_counting_process(spec, kernel, levels, ef.replicate_rng(5, r))
        assert np.all(snaps[0].x <= snaps[1].x)
        assert np.all(snaps[1].x <= snaps[2].x)


def test_counting_process_rejects_excess_exposure():
    spec = ef.PopulationSpec(m=1, pi=[1.0], N=10, a=[1])
    kernel = ef.constant_kernel([[1.0]])
    with pytest.raises(ValueError):
        ef.evaluate_counting_process(spec, kernel, [np.array([2.0])], ef.replicate_rng(0, 0))


def test_indicator_covariance_nonnegative():
    # same-type indicator covariances are >= 0 in theory; the sample version
    # over 1e5 realizations must not undercut zero by more than 4 SEs
    spec = ef.PopulationSpec(m=1, pi=[1.0], N=6, a=[0])
    kernel = ef.table_kernel([(np.array([[1.0], [3.0]]), np.array([0.5, 0.5]))])
    levels = [np.array([0.5]), np.array([0.8])]
    realizations = 100_000
    chi_t = np.empty(realizations, dtype=bool)
    chi_u = np.empty(realizations, dtype=bool)
    for r in range(realizations):
        chi = ef.counting_indicators(spec, kernel, levels, ef.replicate_rng(303, r))
        chi_t[r] = chi[0][0][0]  # individual j at exposure t
        chi_u[r] = chi[1][0][1]  # individual l != j at exposure u
    x = chi_t.astype(float) - chi_t.mean()
    y = chi_u.astype(float) - chi_u.mean()
    cov = float(np.mean(x * y))
    se = float(np.std(x * y, ddof=1) / np.sqrt(realizations))
    assert cov >= -4 * se
