#include <doctest.h>

#include <set>
#include <sstream>

#include "tacslip/errors.hpp"
#include "tacslip/search.hpp"
#include "tacslip/sim.hpp"

using namespace tacslip;

namespace {

// A small but realistic corpus; shared across cases to keep the suite quick.
const std::vector<LabeledRun>& corpus() {
    static const std::vector<LabeledRun> runs = [] {
        std::vector<LabeledRun> r;
        const SensorNoiseProfile noise;
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const double speed = 0.3 + 0.2 * static_cast<double>(seed);
            r.push_back(gen_single_finger_run(noise, std::min(speed, 5.0), seed));
        }
        return r;
    }();
    return runs;
}

}  // namespace

TEST_SUITE_BEGIN("search");

TEST_CASE("a single-cell sweep on separable data reaches a high score") {
    Hyperparams hp;
    const std::vector<double> ds{1.0};
    const std::vector<int> ns{13};
    const SweepReport report =
        sweep(corpus(), ClassifierKind::kSvmGaussian, ds, ns, hp, {}, 11);
    REQUIRE(report.cells.size() == 1);
    CHECK_FALSE(report.cells[0].failed);
    CHECK(report.cells[0].macro_f1 > 0.9);
    CHECK(report.cells[0].macro_f1 <= 1.0);
}

TEST_CASE("sweep cell training sizes follow the downsampling arithmetic") {
    Hyperparams hp;
    const std::vector<double> ds{0.4, 1.0};
    const std::vector<int> ns{5, 13};
    const SweepReport report =
        sweep(corpus(), ClassifierKind::kThreshold, ds, ns, hp, {}, 11);
    REQUIRE(report.cells.size() == 4);

    // recompute the expected size for each cell from the same split
    const RunSplit split = split_runs(corpus(), derive_seed(11, 0x5e1ec7));
    std::vector<LabeledRun> train_runs;
    for (std::size_t i : split.train) train_runs.push_back(corpus()[i]);
    for (const SweepCell& cell : report.cells) {
        LabelConfig label;
        label.n_slip = cell.n_slip;
        const Dataset full = label_runs(train_runs, label);
        const std::size_t expected =
            static_cast<std::size_t>(cell.d * static_cast<double>(full.static_count)) +
            full.slip_count;
        CHECK(cell.train_size == expected);
    }
}

TEST_CASE("sweeps are deterministic and parallel execution changes nothing") {
    Hyperparams hp;
    const std::vector<double> ds{0.5, 1.0};
    const std::vector<int> ns{8, 13};
    const SweepReport a = sweep(corpus(), ClassifierKind::kLogReg, ds, ns, hp, {}, 3, 1);
    const SweepReport b = sweep(corpus(), ClassifierKind::kLogReg, ds, ns, hp, {}, 3, 2);
    REQUIRE(a.cells.size() == b.cells.size());
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        CHECK(a.cells[i].macro_f1 == b.cells[i].macro_f1);
        CHECK(a.cells[i].train_size == b.cells[i].train_size);
        CHECK(a.cells[i].d == b.cells[i].d);
        CHECK(a.cells[i].n_slip == b.cells[i].n_slip);
    }
}

TEST_CASE("sweep csv has the documented header and row order") {
    Hyperparams hp;
    const std::vector<double> ds{1.0, 0.4};  // intentionally unsorted
    const std::vector<int> ns{13, 5};
    const SweepReport report =
        sweep(corpus(), ClassifierKind::kThreshold, ds, ns, hp, {}, 2);
    std::ostringstream os;
    write_sweep_csv(report, os);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "classifier,d,n_slip,macro_f1,converged");
    std::getline(is, line);
    CHECK(line.rfind("threshold,0.4,5,", 0) == 0);  // d ascending, then n_slip
    std::getline(is, line);
    CHECK(line.rfind("threshold,0.4,13,", 0) == 0);
    std::getline(is, line);
    CHECK(line.rfind("threshold,1,5,", 0) == 0);
}

TEST_CASE("sweep rejects an empty grid") {
    Hyperparams hp;
    const std::vector<double> none;
    const std::vector<int> ns{13};
    CHECK_THROWS_AS(sweep(corpus(), ClassifierKind::kThreshold, none, ns, hp, {}, 1),
                    InputError);
}

TEST_CASE("search with budget one returns that single point") {
    const SearchSpace space;
    const SearchResult r = hyperparam_search(corpus(), ClassifierKind::kSvmGaussian,
                                             space, 1, 3, {}, 0.4, 5);
    CHECK(r.evaluated.size() == 1);
    CHECK(r.best.gamma == r.evaluated[0].gamma);
    CHECK(r.best.c == r.evaluated[0].c);
    CHECK(r.best.score == r.evaluated[0].score);
    CHECK(r.best.gamma >= space.gamma_min);
    CHECK(r.best.gamma <= space.gamma_max);
}

TEST_CASE("the returned score is the max over all sampled candidates") {
    const SearchSpace space;
    const SearchResult r = hyperparam_search(corpus(), ClassifierKind::kSvmGaussian,
                                             space, 6, 3, {}, 0.4, 9);
    CHECK(r.evaluated.size() == 6);
    double best = -1.0;
    for (const SearchCandidate& c : r.evaluated) {
        best = std::max(best, c.score);
    }
    CHECK(r.best.score == best);
}

TEST_CASE("search is deterministic per seed") {
    const SearchSpace space;
    const SearchResult a = hyperparam_search(corpus(), ClassifierKind::kSvmGaussian,
                                             space, 3, 3, {}, 0.4, 21);
    const SearchResult b = hyperparam_search(corpus(), ClassifierKind::kSvmGaussian,
                                             space, 3, 3, {}, 0.4, 21);
    REQUIRE(a.evaluated.size() == b.evaluated.size());
    for (std::size_t i = 0; i < a.evaluated.size(); ++i) {
        CHECK(a.evaluated[i].gamma == b.evaluated[i].gamma);
        CHECK(a.evaluated[i].c == b.evaluated[i].c);
        CHECK(a.evaluated[i].score == b.evaluated[i].score);
    }
}

TEST_CASE("search input validation") {
    const SearchSpace space;
    CHECK_THROWS_AS(hyperparam_search(corpus(), ClassifierKind::kSvmGaussian, space, 0,
                                      3, {}, 0.4, 1),
                    InputError);
    CHECK_THROWS_AS(hyperparam_search(corpus(), ClassifierKind::kThreshold, space, 3, 3,
                                      {}, 0.4, 1),
                    InputError);
    SearchSpace inverted;
    inverted.gamma_min = 10.0;
    inverted.gamma_max = 1.0;
    CHECK_THROWS_AS(hyperparam_search(corpus(), ClassifierKind::kSvmGaussian, inverted,
                                      3, 3, {}, 0.4, 1),
                    InputError);
}

TEST_CASE("no run contributes samples to both sides of the sweep split") {
    const RunSplit split = split_runs(corpus(), derive_seed(11, 0x5e1ec7));
    std::set<std::size_t> train(split.train.begin(), split.train.end());
    for (std::size_t i : split.test) {
        CHECK(train.count(i) == 0);
    }
    CHECK(split.train.size() + split.test.size() == corpus().size());
}

TEST_SUITE_END();
