#include "party/metrics.hpp"

#include "party/errors.hpp"
#include "party/rng.hpp"

#include "doctest.h"

#include <Eigen/Dense>

#include <cmath>

using namespace party;
using doctest::Approx;

namespace {

EmbeddingSet set_from_rows(const std::vector<std::vector<double>>& rows,
                           const std::string& prefix = "r") {
    EmbeddingSet set;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "%s%06zu", prefix.c_str(), i);
        set.records.push_back({name, rows[i], {}, {}, ""});
    }
    set.dim = rows.empty() ? 0 : static_cast<int>(rows[0].size());
    set.validate();
    return set;
}

EmbeddingSet paired_set(const std::vector<std::vector<double>>& text,
                        const std::vector<std::vector<double>>& motion) {
    EmbeddingSet set;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "p%06zu", i);
        set.records.push_back({name, {}, text[i], motion[i], ""});
    }
    set.dim = text.empty() ? 0 : static_cast<int>(text[0].size());
    set.validate();
    return set;
}

std::vector<std::vector<double>> gaussian_rows(int n, int d,
                                               const std::vector<double>& mu,
                                               const std::vector<double>& sigma,
                                               std::uint64_t seed) {
    SplitMix64 rng(seed);
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(n));
    for (auto& row : rows) {
        row.resize(static_cast<std::size_t>(d));
        for (int c = 0; c < d; ++c) {
            row[static_cast<std::size_t>(c)] =
                mu[static_cast<std::size_t>(c)] +
                sigma[static_cast<std::size_t>(c)] * rng.gaussian();
        }
    }
    return rows;
}

} // namespace

TEST_CASE("matrix sqrt psd") {
    SUBCASE("identity and diagonal") {
        CHECK(matrix_sqrt_psd(Eigen::MatrixXd::Identity(4, 4))
                  .isApprox(Eigen::MatrixXd::Identity(4, 4), 1e-14));
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
        d(0, 0) = 4.0;
        d(1, 1) = 9.0;
        Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(2, 2);
        expected(0, 0) = 2.0;
        expected(1, 1) = 3.0;
        CHECK(matrix_sqrt_psd(d).isApprox(expected, 1e-14));
    }
    SUBCASE("seeded PSD reconstruction") {
        SplitMix64 rng(321);
        for (int trial = 0; trial < 100; ++trial) {
            const int d = 2 + static_cast<int>(rng.bounded(14));
            Eigen::MatrixXd a(d, d);
            for (int r = 0; r < d; ++r) {
                for (int c = 0; c < d; ++c) {
                    a(r, c) = rng.uniform(-1.0, 1.0);
                }
            }
            const Eigen::MatrixXd m = a.transpose() * a;
            const Eigen::MatrixXd s = matrix_sqrt_psd(m);
            CHECK((s - s.transpose()).cwiseAbs().maxCoeff() < 1e-12);
            const double rel = (s * s - m).norm() / m.norm();
            CHECK(rel < 1e-8);
            // idempotence: sqrt(S*S) recovers S
            const Eigen::MatrixXd s2 = matrix_sqrt_psd(s * s);
            CHECK((s2 - s).norm() <= 1e-7 * std::max(1.0, s.norm()));
        }
    }
    SUBCASE("asymmetric input rejected") {
        Eigen::MatrixXd m(2, 2);
        m << 1.0, 0.5, -0.5, 1.0;
        CHECK_THROWS_AS(matrix_sqrt_psd(m), ValidationError);
    }
}

TEST_CASE("fid basics") {
    const auto rows = gaussian_rows(64, 6, std::vector<double>(6, 0.0),
                                    std::vector<double>(6, 1.0), 7);
    const EmbeddingSet a = set_from_rows(rows);

    SUBCASE("identical sets score zero") {
        CHECK(fid(a, a) < 1e-8);
    }
    SUBCASE("symmetry") {
        const auto rows_b = gaussian_rows(64, 6, std::vector<double>(6, 0.3),
                                          std::vector<double>(6, 1.4), 8);
        const EmbeddingSet b = set_from_rows(rows_b);
        CHECK(std::abs(fid(a, b) - fid(b, a)) < 1e-10);
        CHECK(fid(a, b) >= 0.0);
    }
    SUBCASE("pure mean shift converges to |v|^2") {
        std::vector<std::vector<double>> shifted = rows;
        const std::vector<double> v = {0.7, -0.2, 0.4, 0.0, 1.1, -0.6};
        double v2 = 0.0;
        for (double x : v) v2 += x * x;
        for (auto& row : shifted) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                row[c] += v[c];
            }
        }
        const EmbeddingSet b = set_from_rows(shifted);
        // identical covariances cancel exactly, only the mean term remains
        CHECK(fid(a, b) == Approx(v2).epsilon(1e-6));
    }
    SUBCASE("dimension mismatch rejected") {
        const EmbeddingSet b = set_from_rows(gaussian_rows(
            16, 5, std::vector<double>(5, 0.0), std::vector<double>(5, 1.0), 9));
        CHECK_THROWS_AS(fid(a, b), ValidationError);
    }
    SUBCASE("orthogonal transform of both sets leaves fid unchanged") {
        const auto rows_b = gaussian_rows(64, 6, std::vector<double>(6, 0.5),
                                          std::vector<double>(6, 2.0), 10);
        const EmbeddingSet b = set_from_rows(rows_b);
        const double base = fid(a, b);
        // Householder reflection: orthogonal, deterministic
        Eigen::VectorXd u(6);
        u << 1, 2, -1, 0.5, -2, 1;
        u.normalize();
        const Eigen::MatrixXd q =
            Eigen::MatrixXd::Identity(6, 6) - 2.0 * u * u.transpose();
        auto rotate = [&](const std::vector<std::vector<double>>& rs) {
            std::vector<std::vector<double>> out = rs;
            for (auto& row : out) {
                Eigen::Map<Eigen::VectorXd> x(row.data(), 6);
                x = (q * x).eval();
            }
            return out;
        };
        const double rotated =
            fid(set_from_rows(rotate(rows)), set_from_rows(rotate(rows_b)));
        CHECK(std::abs(rotated - base) < 1e-6);
    }
}

TEST_CASE("fid matches the closed form on seeded gaussians") {
    // mu1 = 0, mu2 = 0.5; sigma1 = 1, sigma2 = 2 per coordinate, d = 8:
    // FID = 8*0.25 + 8*(1-2)^2 = 10
    const int d = 8;
    const std::vector<double> mu1(d, 0.0), sig1(d, 1.0);
    const std::vector<double> mu2(d, 0.5), sig2(d, 2.0);
    const EmbeddingSet a = set_from_rows(gaussian_rows(10000, d, mu1, sig1, 100), "a");
    const EmbeddingSet b = set_from_rows(gaussian_rows(10000, d, mu2, sig2, 200), "b");
    const double value = fid(a, b);
    CHECK(std::abs(value - 10.0) / 10.0 < 0.05);
}

TEST_CASE("r precision") {
    SUBCASE("matched embeddings hit top-1 exactly") {
        std::vector<std::vector<double>> text;
        for (int i = 0; i < 40; ++i) {
            text.push_back({static_cast<double>(i), 1.0});
        }
        const EmbeddingSet pairs = paired_set(text, text);
        const auto rates = r_precision_topk(pairs, 32, 42);
        CHECK(rates[0] == 1.0);
        CHECK(rates[1] == 1.0);
        CHECK(rates[2] == 1.0);
        CHECK(r_precision(pairs, 1, 32, 42) == 1.0);
    }
    SUBCASE("independent embeddings land at 1/32") {
        SplitMix64 rng(777);
        std::vector<std::vector<double>> text, motion;
        for (int i = 0; i < 10000; ++i) {
            std::vector<double> tv(8), mv(8);
            for (auto& v : tv) v = rng.gaussian();
            for (auto& v : mv) v = rng.gaussian();
            text.push_back(tv);
            motion.push_back(mv);
        }
        const EmbeddingSet pairs = paired_set(text, motion);
        const auto rates = r_precision_topk(pairs, 32, 4242);
        CHECK(std::abs(rates[0] - 1.0 / 32.0) < 0.01);
        // nested events keep the rates monotone in k
        CHECK(rates[0] <= rates[1]);
        CHECK(rates[1] <= rates[2]);
        // deterministic given (data, seed)
        const auto again = r_precision_topk(pairs, 32, 4242);
        CHECK(rates[0] == again[0]);
        CHECK(rates[2] == again[2]);
    }
    SUBCASE("too few records rejected") {
        const EmbeddingSet pairs =
            paired_set({{1.0, 0.0}, {2.0, 0.0}}, {{1.0, 0.0}, {2.0, 0.0}});
        CHECK_THROWS_AS(r_precision_topk(pairs, 32, 1), ValidationError);
        CHECK_THROWS_AS(r_precision(pairs, 4, 2, 1), ValidationError);
    }
}

TEST_CASE("mm dist") {
    SUBCASE("matched pairs score zero") {
        const EmbeddingSet pairs =
            paired_set({{1, 2}, {3, 4}}, {{1, 2}, {3, 4}});
        CHECK(mm_dist(pairs) == 0.0);
    }
    SUBCASE("constant offset of 2") {
        const EmbeddingSet pairs =
            paired_set({{0, 0}, {5, 5}}, {{2, 0}, {5, 3}});
        CHECK(mm_dist(pairs) == Approx(2.0).epsilon(1e-15));
    }
    SUBCASE("matches the brute-force mean") {
        SplitMix64 rng(31);
        std::vector<std::vector<double>> text, motion;
        for (int i = 0; i < 57; ++i) {
            std::vector<double> tv(5), mv(5);
            for (auto& v : tv) v = rng.uniform(-2.0, 2.0);
            for (auto& v : mv) v = rng.uniform(-2.0, 2.0);
            text.push_back(tv);
            motion.push_back(mv);
        }
        const EmbeddingSet pairs = paired_set(text, motion);
        double expected = 0.0;
        for (std::size_t i = 0; i < text.size(); ++i) {
            double sq = 0.0;
            for (std::size_t c = 0; c < 5; ++c) {
                const double d = text[i][c] - motion[i][c];
                sq += d * d;
            }
            expected += std::sqrt(sq);
        }
        expected /= static_cast<double>(text.size());
        CHECK(mm_dist(pairs) == Approx(expected).epsilon(1e-14));
    }
}

TEST_CASE("diversity") {
    SUBCASE("identical vectors score zero") {
        const EmbeddingSet set = set_from_rows(
            std::vector<std::vector<double>>(40, {1.0, 2.0, 3.0}));
        CHECK(diversity(set, 10, 5) == 0.0);
    }
    SUBCASE("two balanced clusters at distance 4 average near 2") {
        std::vector<std::vector<double>> rows;
        for (int i = 0; i < 1000; ++i) {
            rows.push_back({0.0, 0.0});
            rows.push_back({4.0, 0.0});
        }
        const EmbeddingSet set = set_from_rows(rows);
        const double v = diversity(set, 300, 99);
        CHECK(std::abs(v - 2.0) < 0.45); // binomial band, ~3 sigma is 0.35
    }
    SUBCASE("record order never affects the value") {
        std::vector<std::vector<double>> rows;
        SplitMix64 rng(9);
        for (int i = 0; i < 30; ++i) {
            rows.push_back({rng.gaussian(), rng.gaussian()});
        }
        const EmbeddingSet set = set_from_rows(rows);
        EmbeddingSet shuffled = set; // deliberately left unsorted
        std::swap(shuffled.records[0], shuffled.records[17]);
        std::swap(shuffled.records[4], shuffled.records[22]);
        std::swap(shuffled.records[9], shuffled.records[29]);
        CHECK(diversity(set, 10, 123) == diversity(shuffled, 10, 123));
    }
    SUBCASE("small sets shrink n_pairs with a warning") {
        const EmbeddingSet set = set_from_rows(
            std::vector<std::vector<double>>(6, {0.0, 1.0}));
        CHECK(diversity(set, 300, 1) == 0.0); // shrinks to 3 pairs
    }
}

TEST_CASE("multimodality") {
    auto grouped = [](const std::vector<std::pair<std::string,
                                                  std::vector<double>>>& rs) {
        EmbeddingSet set;
        int i = 0;
        for (const auto& [group, vec] : rs) {
            char name[32];
            std::snprintf(name, sizeof name, "g%06d", i++);
            set.records.push_back({name, vec, {}, {}, group});
        }
        set.dim = static_cast<int>(rs[0].second.size());
        set.validate();
        return set;
    };
    SUBCASE("constant groups score zero") {
        const EmbeddingSet set = grouped({{"a", {1, 1}},
                                          {"a", {1, 1}},
                                          {"b", {2, 0}},
                                          {"b", {2, 0}}});
        CHECK(multimodality(set, 10, 3) == 0.0);
    }
    SUBCASE("single two-point group scores its distance") {
        const EmbeddingSet set = grouped({{"a", {0, 0}}, {"a", {3, 4}}});
        CHECK(multimodality(set, 10, 3) == Approx(5.0).epsilon(1e-15));
    }
    SUBCASE("two-point groups give the exact mean of distances") {
        // every within-group pair has one distance, so sampling is moot
        const EmbeddingSet set = grouped({{"a", {0, 0}},
                                          {"a", {1, 0}},
                                          {"b", {0, 0}},
                                          {"b", {0, 3}}});
        CHECK(multimodality(set, 10, 3) == Approx(2.0).epsilon(1e-15));
    }
    SUBCASE("undersized groups are skipped") {
        const EmbeddingSet set = grouped({{"a", {0, 0}},
                                          {"a", {2, 0}},
                                          {"lonely", {9, 9}}});
        CHECK(multimodality(set, 10, 3) == Approx(2.0).epsilon(1e-15));
    }
    SUBCASE("all groups undersized is an error") {
        const EmbeddingSet set = grouped({{"a", {0, 0}}, {"b", {1, 1}}});
        CHECK_THROWS_AS(multimodality(set, 10, 3), ValidationError);
    }
}

TEST_CASE("every metric is invariant under record reordering") {
    SplitMix64 rng(2718);
    EmbeddingSet set;
    for (int i = 0; i < 40; ++i) {
        char name[16];
        std::snprintf(name, sizeof name, "x%05d", i);
        EmbeddingRecord rec;
        rec.id = name;
        rec.vector = {rng.gaussian(), rng.gaussian(), rng.gaussian()};
        rec.text_vec = {rng.gaussian(), rng.gaussian(), rng.gaussian()};
        rec.motion_vec = {rng.gaussian(), rng.gaussian(), rng.gaussian()};
        rec.group_key = "g" + std::to_string(i % 4);
        set.records.push_back(std::move(rec));
    }
    set.dim = 3;
    EmbeddingSet shuffled = set; // unsorted on purpose
    for (std::size_t i = 0; i + 1 < shuffled.records.size(); i += 2) {
        std::swap(shuffled.records[i], shuffled.records[i + 1]);
    }
    std::reverse(shuffled.records.begin(), shuffled.records.end());

    CHECK(fid(set, set) == fid(shuffled, shuffled));
    CHECK(mm_dist(set) == mm_dist(shuffled));
    CHECK(diversity(set, 15, 5) == diversity(shuffled, 15, 5));
    CHECK(multimodality(set, 6, 5) == multimodality(shuffled, 6, 5));
    const auto a = r_precision_topk(set, 16, 5);
    const auto b = r_precision_topk(shuffled, 16, 5);
    CHECK(a[0] == b[0]);
    CHECK(a[1] == b[1]);
    CHECK(a[2] == b[2]);
}

TEST_CASE("repeated eval") {
    SUBCASE("deterministic metric collapses the interval") {
        const MetricRun run = repeated_eval(
            "const", [](std::uint64_t) { return 3.5; }, 20, 1);
        CHECK(run.mean == 3.5);
        CHECK(run.ci95 == 0.0);
        CHECK(run.values.size() == 20);
    }
    SUBCASE("seed-sensitive metric yields a positive interval") {
        const MetricRun run = repeated_eval(
            "noisy",
            [](std::uint64_t seed) {
                SplitMix64 rng(seed);
                return rng.next_double();
            },
            20, 1);
        CHECK(run.ci95 > 0.0);
        double mean = 0.0;
        for (double v : run.values) mean += v;
        mean /= static_cast<double>(run.values.size());
        CHECK(run.mean == Approx(mean).epsilon(1e-15));
    }
    SUBCASE("single repetition reports zero by convention") {
        const MetricRun run = repeated_eval(
            "one", [](std::uint64_t) { return 1.0; }, 1, 9);
        CHECK(run.ci95 == 0.0);
    }
    SUBCASE("derived seeds are seed+i") {
        std::vector<std::uint64_t> seen;
        repeated_eval(
            "probe",
            [&](std::uint64_t s) {
                seen.push_back(s);
                return 0.0;
            },
            5, 100);
        CHECK(seen == std::vector<std::uint64_t>{100, 101, 102, 103, 104});
    }
}
