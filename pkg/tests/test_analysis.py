import math

import numpy as np
import pytest

from mabcvk.analysis import (
    JULIAN_YEAR,
    bench,
    brute_force_recover,
    crack_time,
    keyspace_table,
    linear_fit,
    prime_keyspace_report,
    randomization_report,
    render_duration,
    search_space_size,
)
from mabcvk.cipher import encrypt_block
from mabcvk.container import decrypt_file, encrypt_file
from mabcvk.exceptions import DomainError, KeyNotFoundError, MABCVKError
from mabcvk.keys import KeyPair, generate_keypair, make_context
from oracles import candidates_brute, inverse_euclid, prime_count_sieve

HOUR = 3600


class TestCrackTime:
    def test_56_bits_one_per_us(self):
        assert crack_time(56, 1) / JULIAN_YEAR == pytest.approx(1142, rel=0.01)

    def test_56_bits_million_per_us(self):
        assert crack_time(56, 1e6) / HOUR == pytest.approx(10.01, rel=0.01)

    def test_one_bit(self):
        assert crack_time(1, 1) == pytest.approx(1e-6)

    @pytest.mark.parametrize(
        "bits,keys,years_1,years_1e6",
        [
            (56, 7.2e16, 1142, None),
            (128, 3.4e38, 5.4e24, 5.4e18),
            (168, 3.7e50, 5.9e36, 5.9e30),
        ],
    )
    def test_keyspace_rows(self, bits, keys, years_1, years_1e6):
        # the printed keyspace sizes are two significant figures
        assert float(f"{2.0**bits:.1e}") == keys
        assert crack_time(bits, 1) / JULIAN_YEAR == pytest.approx(years_1, rel=0.01)
        if years_1e6 is not None:
            assert crack_time(bits, 1e6) / JULIAN_YEAR == pytest.approx(years_1e6, rel=0.01)

    def test_table_shape(self):
        rows = keyspace_table()
        assert [(r.key_bits, r.rate_per_microsecond) for r in rows] == [
            (56, 1.0), (56, 1e6), (128, 1.0), (128, 1e6), (168, 1.0), (168, 1e6)
        ]
        assert rows[0].rendered == "1142 years"
        assert rows[1].rendered == "10.01 hours"

    def test_rendering(self):
        assert render_duration(1e-6) == "1 µs"
        assert render_duration(30) == "30 s"
        assert render_duration(5 * JULIAN_YEAR) == "5 years"

    def test_domain(self):
        with pytest.raises(DomainError):
            crack_time(0, 1)
        with pytest.raises(DomainError):
            crack_time(10, 0)


class TestPrimeKeyspace:
    def test_128_bits(self):
        r = prime_keyspace_report(128, 1e12)
        assert r.prime_count == pytest.approx(3.8353e36, rel=1e-3)
        assert r.years == pytest.approx(1.216e17, rel=5e-3)

    def test_two_bits(self):
        assert prime_keyspace_report(2, 1).prime_count == pytest.approx(4 / math.log(4))
        assert prime_keyspace_report(2, 1).prime_count == pytest.approx(2.885, abs=1e-3)

    def test_ten_bits_underestimates(self):
        r = prime_keyspace_report(10, 1e3)
        exact = prime_count_sieve(1024)
        assert exact == 172
        assert r.prime_count == pytest.approx(1024 / math.log(1024))
        assert (exact - r.prime_count) / exact == pytest.approx(0.141, abs=0.005)
        assert r.years == pytest.approx(r.prime_count / 1e3 / JULIAN_YEAR)


class TestRandomization:
    def test_constant_0x41(self, demo_ctx, rng):
        report = randomization_report(demo_ctx, b"\x41" * 1024, 100, rng)
        assert report.candidate_counts == {65: 3}
        assert 2 <= report.distinct_observed[65] <= 3
        inv = inverse_euclid(317, 263)
        expected = sorted(a * inv % 263 for a in (84, 126, 252))
        assert expected == [60, 90, 180]
        assert set(report.observed_values[65]) <= set(expected)
        assert sorted(encrypt_block(65, demo_ctx, a) for a in (84, 126, 252)) == expected

    def test_single_candidate(self, demo_ctx, rng):
        report = randomization_report(demo_ctx, bytes(64), 50, rng)
        assert report.candidate_counts == {0: 1}
        assert report.distinct_observed == {0: 1}

    def test_coverage_at_1000_trials(self, demo_ctx):
        # every byte value with 1..4 candidates in a single pass
        usable = [p for p in range(256) if 1 <= len(candidates_brute(p, 263, 317)) <= 4]
        sample = bytes(usable)
        report = randomization_report(demo_ctx, sample, 1000, np.random.default_rng(0))
        # coupon collector: P(miss one of 4 in 1000 draws) < 4 * 0.75**1000
        assert report.min_coverage >= 0.99
        assert all(report.distinct_observed[p] <= report.candidate_counts[p] for p in usable)
        assert sum(report.histogram.values()) == len(usable)

    def test_never_exceeds_candidates(self, small_ctx, rng):
        report = randomization_report(small_ctx, rng.bytes(500), 30, rng)
        for p, n in report.distinct_observed.items():
            assert n <= report.candidate_counts[p]


class TestBench:
    def test_linear_fit_exact(self):
        fit = linear_fit([1, 2, 3, 4], [3, 5, 7, 9])
        assert fit.slope == pytest.approx(2)
        assert fit.intercept == pytest.approx(1)
        assert fit.r_squared == pytest.approx(1)

    def test_linear_fit_noisy(self):
        x = np.arange(10.0)
        y = np.array([0.1, 0.9, 2.2, 2.8, 4.1, 5.0, 6.2, 6.9, 8.0, 9.1])
        fit = linear_fit(x, y)
        ss_res = np.sum((y - (fit.slope * x + fit.intercept)) ** 2)
        ss_tot = np.sum((y - y.mean()) ** 2)
        assert fit.r_squared == pytest.approx(1 - ss_res / ss_tot)

    def test_single_size_has_no_fit(self, small_ctx, rng):
        result = bench([4], small_ctx, rng, repeats=1)
        assert len(result.rows) == 1 and result.encrypt_fit is None

    def test_rows(self, small_ctx, rng):
        result = bench([8, 16, 32], small_ctx, rng, repeats=1)
        assert [r.size_kb for r in result.rows] == [8, 16, 32]
        assert all(r.encrypt_seconds > 0 and r.decrypt_seconds > 0 for r in result.rows)
        assert result.encrypt_fit is not None

    def test_sizes_must_increase(self, small_ctx, rng):
        with pytest.raises(DomainError):
            bench([8, 8], small_ctx, rng)


class TestBruteForce:
    def test_demo_container(self, demo_ctx):
        container = encrypt_file(b"WORLD", demo_ctx, np.random.default_rng(1))
        kp = brute_force_recover(b"WORLD", container, 10)
        assert decrypt_file(container, make_context(kp, 8)) == b"WORLD"

    def test_wrong_plaintext(self, demo_ctx):
        container = encrypt_file(b"WORLD", demo_ctx, np.random.default_rng(1))
        with pytest.raises(KeyNotFoundError):
            brute_force_recover(b"HELLO", container, 10)

    def test_exact_key_on_longer_message(self):
        g = np.random.default_rng(3)
        kp = generate_keypair(9, "3/10", 3, g)
        ctx = make_context(kp, 3)
        plain = g.bytes(48)
        container = encrypt_file(plain, ctx, g, "packed")
        found = brute_force_recover(plain, container, 9)
        assert decrypt_file(container, make_context(found, 3)) == plain

    def test_search_space(self):
        pi = prime_count_sieve(1023)
        assert search_space_size(10) == math.comb(pi, 2) == math.comb(172, 2)
        assert search_space_size(8, width=3) == math.comb(
            sum(1 for p in range(9, 256) if prime_count_sieve(p) - prime_count_sieve(p - 1)), 2
        )

    def test_bit_limit(self, demo_ctx):
        container = encrypt_file(b"WORLD", demo_ctx, np.random.default_rng(1))
        with pytest.raises(DomainError):
            brute_force_recover(b"WORLD", container, 21)

    def test_lexicographic_first(self, demo_ctx):
        # a one-block message admits many keys; the smallest (k1, k2, alpha) wins
        container = encrypt_file(b"W", demo_ctx, np.random.default_rng(0))
        kp = brute_force_recover(b"W", container, 9)
        for k1 in range(257, kp.k1):
            for k2 in range(k1 + 1, 512):
                try:
                    ctx = make_context(KeyPair(k1, k2, "1/10"), 8)
                    recovered = decrypt_file(container, ctx)
                except MABCVKError:
                    continue
                assert recovered != b"W"
