#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "labdx/impute.hpp"
#include "labdx/synth.hpp"

using namespace labdx;

namespace {

// one-test sequence from (values, mask) pairs
LabSequence series(std::vector<double> v, BoolVec m) {
    LabSequence s;
    for (std::size_t t = 0; t < v.size(); ++t) {
        s.values.push_back({v[t]});
        s.mask.push_back({m[t]});
    }
    return s;
}

std::vector<double> column(const LabSequence& s) {
    std::vector<double> out;
    for (const auto& row : s.values) out.push_back(row[0]);
    return out;
}

LabSequence random_seq(std::mt19937_64& rng, std::size_t t = 6, std::size_t m = 3) {
    std::normal_distribution<double> n01(0.0, 1.0);
    LabSequence s;
    for (std::size_t i = 0; i < t; ++i) {
        std::vector<double> row(m);
        BoolVec mask(m);
        for (std::size_t j = 0; j < m; ++j) {
            mask[j] = (rng() % 2) ? 1 : 0;
            row[j] = mask[j] ? n01(rng) : 0.0;
        }
        s.values.push_back(row);
        s.mask.push_back(mask);
    }
    s.mask[0][0] = 1;
    return s;
}

}  // namespace

TEST_CASE("zero imputation fixtures") {
    CHECK(column(impute_zero(series({1, 7, 3}, {1, 0, 1}))) ==
          std::vector<double>{1, 0, 3});
    CHECK(column(impute_zero(series({1, 2}, {1, 1}))) == std::vector<double>{1, 2});
    CHECK(column(impute_zero(series({9, 9}, {0, 0}))) == std::vector<double>{0, 0});
}

TEST_CASE("last&next fixtures") {
    CHECK(column(impute_last_next(series({1, 0, 3}, {1, 0, 1}))) ==
          std::vector<double>{1, 2, 3});
    CHECK(column(impute_last_next(series({0, 5, 0}, {0, 1, 0}))) ==
          std::vector<double>{5, 5, 5});
    CHECK(column(impute_last_next(series({0, 0}, {0, 0}))) ==
          std::vector<double>{0, 0});
    // interior gap equals the midpoint of its neighbours
    CHECK(column(impute_last_next(series({2, 0, 0, 8}, {1, 0, 0, 1}))) ==
          std::vector<double>{2, 5, 5, 8});
}

TEST_CASE("row mean fixtures") {
    auto out = column(impute_row_mean(series({1, 0, 3, 0, 5}, {1, 0, 1, 0, 1})));
    CHECK(out == std::vector<double>{1, 3, 3, 3, 5});
    CHECK(column(impute_row_mean(series({0, 7}, {0, 1}))) ==
          std::vector<double>{7, 7});
    CHECK(column(impute_row_mean(series({0, 0}, {0, 0}))) ==
          std::vector<double>{0, 0});
}

TEST_CASE("nocb fixtures") {
    CHECK(column(impute_nocb(series({1, 0, 3}, {1, 0, 1}))) ==
          std::vector<double>{1, 3, 3});
    CHECK(column(impute_nocb(series({0, 2}, {0, 1}))) == std::vector<double>{2, 2});
    // trailing gap carries the last observation forward
    CHECK(column(impute_nocb(series({4, 0}, {1, 0}))) == std::vector<double>{4, 4});
    CHECK(column(impute_nocb(series({0, 0}, {0, 0}))) == std::vector<double>{0, 0});
}

TEST_CASE("every heuristic is total and the identity on observed entries") {
    std::mt19937_64 rng(13);
    for (int it = 0; it < 40; ++it) {
        LabSequence s = random_seq(rng);
        for (const auto& method :
             {ImputeFn(impute_zero), ImputeFn(impute_last_next),
              ImputeFn(impute_row_mean), ImputeFn(impute_nocb)}) {
            LabSequence out = method(s);
            REQUIRE(out.days() == s.days());
            for (std::size_t t = 0; t < s.days(); ++t) {
                for (std::size_t m = 0; m < s.tests(); ++m) {
                    CHECK(out.mask[t][m] == 1);
                    CHECK(std::isfinite(out.values[t][m]));
                    if (s.mask[t][m]) {
                        CHECK(out.values[t][m] == s.values[t][m]);
                    }
                }
            }
        }
    }
}

TEST_CASE("model imputation demands the recurrent generative architecture") {
    std::mt19937_64 rng(7);
    ModelParams p = init_model(Arch::VAE_NN, 3, 2, 4, 3, 0.5, rng);
    LabSequence s = random_seq(rng);
    CHECK_THROWS_AS(impute_model(p, s), ConfigError);
}

TEST_CASE("model imputation preserves observed entries and is deterministic") {
    std::mt19937_64 rng(9);
    ModelParams p = init_model(Arch::VRNN_NN, 3, 2, 4, 3, 0.5, rng);
    LabSequence s = random_seq(rng);
    LabSequence a = impute_model(p, s);
    LabSequence b = impute_model(p, s);
    CHECK(a.values == b.values);
    for (std::size_t t = 0; t < s.days(); ++t) {
        for (std::size_t m = 0; m < s.tests(); ++m) {
            CHECK(a.mask[t][m] == 1);
            if (s.mask[t][m]) CHECK(a.values[t][m] == s.values[t][m]);
        }
    }
}

TEST_CASE("drop plan hides the requested fraction of observed coordinates") {
    std::mt19937_64 rng(17);
    std::vector<LabSequence> data;
    for (int i = 0; i < 10; ++i) data.push_back(random_seq(rng, 8, 4));
    std::size_t observed = 0;
    for (const auto& s : data) {
        for (const auto& row : s.mask) {
            for (auto m : row) observed += m;
        }
    }
    DropPlan plan = make_drop_plan(data, 0.10, 3);
    CHECK(plan.coordinates.size() ==
          static_cast<std::size_t>(std::llround(0.10 * observed)));
    for (const auto& [n, t, m] : plan.coordinates) {
        CHECK(data[n].mask[t][m] == 1);
    }
    // determinism
    DropPlan plan2 = make_drop_plan(data, 0.10, 3);
    CHECK(plan.coordinates == plan2.coordinates);
}

TEST_CASE("drop plan rejects out-of-range rates") {
    std::mt19937_64 rng(19);
    std::vector<LabSequence> data = {random_seq(rng)};
    CHECK_THROWS_AS(make_drop_plan(data, 0.0, 1), ConfigError);
    CHECK_THROWS_AS(make_drop_plan(data, 1.0, 1), ConfigError);
}

TEST_CASE("an oracle method scores zero mse") {
    std::mt19937_64 rng(23);
    std::vector<LabSequence> data;
    for (int i = 0; i < 5; ++i) data.push_back(random_seq(rng, 8, 4));
    DropPlan plan = make_drop_plan(data, 0.2, 5);
    // oracle: methods are called once per episode in order, so the truth can
    // be replayed positionally (they only ever see the masked copies)
    std::size_t call = 0;
    ImputeFn oracle = [&](const LabSequence&) {
        LabSequence out = data[call++];
        for (auto& row : out.mask) std::fill(row.begin(), row.end(), 1);
        return out;
    };
    CHECK(imputation_mse(data, plan, oracle) == 0.0);
}

TEST_CASE("zero imputation mse approximates the variance of hidden values") {
    std::mt19937_64 rng(29);
    std::normal_distribution<double> n01(0.0, 1.0);
    std::vector<LabSequence> data;
    for (int i = 0; i < 60; ++i) {
        LabSequence s;
        for (int t = 0; t < 10; ++t) {
            s.values.push_back({n01(rng), n01(rng)});
            s.mask.push_back({1, 1});
        }
        data.push_back(std::move(s));
    }
    DropPlan plan = make_drop_plan(data, 0.1, 31);
    double mean = 0.0, var = 0.0;
    for (const auto& [n, t, m] : plan.coordinates) mean += data[n].values[t][m];
    mean /= static_cast<double>(plan.coordinates.size());
    for (const auto& [n, t, m] : plan.coordinates) {
        const double d = data[n].values[t][m] - mean;
        var += d * d;
    }
    var /= static_cast<double>(plan.coordinates.size());
    const double mse = imputation_mse(data, plan, impute_zero);
    // hidden values are standard normal with near-zero mean, so mse ~= var
    CHECK(mse == Catch::Approx(var + mean * mean).margin(1e-12));
    CHECK(mse == Catch::Approx(1.0).margin(0.15));
}

TEST_CASE("evaluate_imputation emits one row per method in fixed order") {
    std::mt19937_64 rng(37);
    std::vector<LabSequence> data;
    for (int i = 0; i < 8; ++i) data.push_back(random_seq(rng, 10, 4));
    ModelParams p = init_model(Arch::VRNN_NN, 4, 2, 4, 3, 0.5, rng);
    auto rows = evaluate_imputation(data, &p, 0.1, {1, 2, 3});
    REQUIRE(rows.size() == 5);
    CHECK(rows[0].method == "zero");
    CHECK(rows[1].method == "last&next");
    CHECK(rows[2].method == "row mean");
    CHECK(rows[3].method == "NOCB");
    CHECK(rows[4].method == "model");
    for (const auto& r : rows) {
        CHECK(r.per_seed.size() == 3);
        CHECK(std::isfinite(r.mean));
        CHECK(r.stddev >= 0.0);
    }
    // without a model: four heuristic rows only
    auto rows2 = evaluate_imputation(data, nullptr, 0.1, {1, 2});
    CHECK(rows2.size() == 4);
}

TEST_CASE("summarize_row mean and sample standard deviation") {
    ImputationRow row = summarize_row("x", {1.0, 2.0, 3.0});
    CHECK(row.mean == Catch::Approx(2.0));
    CHECK(row.stddev == Catch::Approx(1.0));
}
