// party-eval: batch evaluation front-end for motion coherence scoring,
// reference-stats building, embedding-space metrics, and kernel self-tests.

#include "party/embeddings.hpp"
#include "party/errors.hpp"
#include "party/log.hpp"
#include "party/metrics.hpp"
#include "party/motion.hpp"
#include "party/motion_io.hpp"
#include "party/rng.hpp"
#include "party/spatial.hpp"
#include "party/temporal.hpp"

#include "kernels_selftest.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace party;

namespace {

int default_jobs() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

void parallel_for(std::size_t count, int jobs,
                  const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    const int n_workers = std::min<int>(jobs, static_cast<int>(count));
    std::vector<std::exception_ptr> errors(
        static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) {
        workers.emplace_back([&, w] {
            try {
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= count) break;
                    fn(i);
                }
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
                next.store(count); // stop the pool
            }
        });
    }
    for (auto& t : workers) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

std::vector<std::pair<std::string, fs::path>> list_motion_files(
    const fs::path& dir) {
    if (!fs::exists(dir)) {
        throw IoError("input directory '" + dir.string() + "' does not exist");
    }
    if (!fs::is_directory(dir)) {
        throw IoError("'" + dir.string() + "' is not a directory");
    }
    std::vector<std::pair<std::string, fs::path>> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const fs::path& p = entry.path();
        if (p.extension() == ".json" || p.extension() == ".csv") {
            out.emplace_back(p.stem().string(), p);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct Aggregate {
    double mean = 0.0;
    double std = 0.0;
    double ci95 = 0.0;
};

Aggregate aggregate_of(const std::vector<double>& values) {
    Aggregate a;
    if (values.empty()) return a;
    double sum = 0.0;
    for (double v : values) sum += v;
    a.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double var = 0.0;
        for (double v : values) {
            const double d = v - a.mean;
            var += d * d;
        }
        a.std = std::sqrt(var / static_cast<double>(values.size() - 1));
        a.ci95 = 1.96 * a.std / std::sqrt(static_cast<double>(values.size()));
    }
    return a;
}

json aggregate_json(const Aggregate& a) {
    return {{"mean", a.mean}, {"std", a.std}, {"ci95", a.ci95}};
}

void write_report(const fs::path& out, const std::string& content) {
    write_file(out, content);
    log_info("wrote " + out.string());
}

// ------------------------------------------------------------- coherence

struct CoherenceOptions {
    std::string input;
    std::string skeleton = "humanml3d22";
    std::string partition_file;
    std::string params_file;
    std::string stats_file;
    std::string out;
    std::uint64_t seed = 42;
    int reps = 0;
    bool strict = false;
    int jobs = default_jobs();
    std::string format = "json";
};

struct SequenceScore {
    std::string id;
    bool ok = false;
    std::string error;
    double tc = 0.0;
    double sc = 0.0;
    TemporalReport temporal;
    SpatialReport spatial;
};

int cmd_coherence(const CoherenceOptions& opt) {
    const SkeletonSpec* spec = find_skeleton(opt.skeleton);
    PartitionMap partition;
    int joint_count = spec != nullptr ? spec->joint_count() : 0;
    if (!opt.partition_file.empty()) {
        if (spec == nullptr) {
            // joint count comes from the override itself: take the max index
            PartitionMap probe = parse_partition_override(
                read_file(opt.partition_file), opt.skeleton, 1 << 20);
            int max_index = 0;
            for (const auto& [name, js] : probe.parts) {
                for (int j : js) max_index = std::max(max_index, j);
            }
            joint_count = max_index + 1;
        }
        partition = load_partition_file(opt.partition_file, opt.skeleton,
                                        joint_count);
    } else {
        partition = default_partition(opt.skeleton); // throws on unknown id
    }

    CoherenceParams params;
    if (!opt.params_file.empty()) {
        params = CoherenceParams::from_json(read_file(opt.params_file));
    }
    const RefStats stats = ref_stats_from_json(read_file(opt.stats_file));

    const auto files = list_motion_files(opt.input);
    if (files.empty()) {
        throw ValidationError("no .json or .csv motion files in '" +
                              opt.input + "'");
    }

    std::vector<SequenceScore> scores(files.size());
    parallel_for(files.size(), opt.jobs, [&](std::size_t i) {
        SequenceScore& score = scores[i];
        score.id = files[i].first;
        try {
            const MotionSequence seq = load_motion_file(files[i].second);
            if (seq.skeleton_id != opt.skeleton) {
                throw ValidationError("declares skeleton '" + seq.skeleton_id +
                                      "', expected '" + opt.skeleton + "'");
            }
            score.temporal = temporal_coherence(seq, partition, params);
            score.spatial = spatial_coherence(seq, partition, stats, params);
            score.tc = score.temporal.score;
            score.sc = score.spatial.score;
            score.ok = true;
        } catch (const Error& e) {
            score.error = e.what();
        }
    });

    std::vector<const SequenceScore*> bad;
    for (const auto& s : scores) {
        if (!s.ok) bad.push_back(&s);
    }
    if (!bad.empty()) {
        for (const SequenceScore* s : bad) {
            log_warn("skipping '" + s->id + "': " + s->error);
        }
        if (opt.strict) {
            std::fprintf(stderr, "validation failed on %zu file(s):\n",
                         bad.size());
            for (const SequenceScore* s : bad) {
                std::fprintf(stderr, "  %s: %s\n", s->id.c_str(),
                             s->error.c_str());
            }
            return 1;
        }
    }

    std::vector<double> tc_values, sc_values;
    for (const auto& s : scores) {
        if (s.ok) {
            tc_values.push_back(s.tc);
            sc_values.push_back(s.sc);
        }
    }
    if (tc_values.empty()) {
        std::fprintf(stderr, "no valid sequences in '%s'\n", opt.input.c_str());
        return 1;
    }

    if (opt.format == "csv") {
        std::string csv = "id,tc,sc\n";
        char buf[80];
        for (const auto& s : scores) {
            if (!s.ok) continue;
            std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g\n", s.id.c_str(),
                          s.tc, s.sc);
            csv += buf;
        }
        write_report(opt.out, csv);
        return 0;
    }

    json doc;
    doc["command"] = "coherence";
    doc["config"] = {
        {"input", opt.input},
        {"skeleton", opt.skeleton},
        {"partition", opt.partition_file.empty() ? "default"
                                                 : opt.partition_file},
        {"params", json::parse(params.to_json())},
        {"stats", opt.stats_file},
        {"stats_digest", stats.corpus_digest},
        {"seed", opt.seed},
        {"reps", opt.reps},
        {"strict", opt.strict},
        {"jobs", opt.jobs},
    };

    json sequences = json::array();
    for (const auto& s : scores) {
        if (!s.ok) continue;
        json windows = json::array();
        for (const FrameRange& w : s.temporal.windows) {
            windows.push_back(json::array({w.begin, w.end}));
        }
        json pairs = json::object();
        for (std::size_t p = 0; p < s.temporal.pair_keys.size(); ++p) {
            json column = json::array();
            for (const auto& row : s.temporal.per_window_pair) {
                column.push_back(row[p]);
            }
            pairs[s.temporal.pair_keys[p]] = std::move(column);
        }
        json entry = {
            {"id", s.id},
            {"tc", s.tc},
            {"sc", s.sc},
            {"windows", std::move(windows)},
            {"pairs", std::move(pairs)},
        };
        if (!s.spatial.degenerate_frames.empty()) {
            json degen = json::object();
            for (const auto& [part, frames] : s.spatial.degenerate_frames) {
                degen[part] = frames;
            }
            entry["degenerate_angles"] = std::move(degen);
        }
        sequences.push_back(std::move(entry));
    }
    doc["sequences"] = std::move(sequences);

    if (!bad.empty()) {
        json skipped = json::array();
        for (const SequenceScore* s : bad) {
            skipped.push_back({{"id", s->id}, {"error", s->error}});
        }
        doc["skipped"] = std::move(skipped);
    }

    doc["aggregate"] = {
        {"count", tc_values.size()},
        {"tc", aggregate_json(aggregate_of(tc_values))},
        {"sc", aggregate_json(aggregate_of(sc_values))},
    };

    if (opt.reps > 0) {
        // bootstrap over sequences: rep i draws n ids with replacement from
        // the scored set using seed+i, one shared draw for tc and sc
        const std::size_t n = tc_values.size();
        std::vector<double> tc_reps, sc_reps;
        for (int rep = 0; rep < opt.reps; ++rep) {
            SplitMix64 rng(opt.seed + static_cast<std::uint64_t>(rep));
            double tc_acc = 0.0, sc_acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const std::size_t idx = static_cast<std::size_t>(
                    rng.bounded(static_cast<std::uint64_t>(n)));
                tc_acc += tc_values[idx];
                sc_acc += sc_values[idx];
            }
            tc_reps.push_back(tc_acc / static_cast<double>(n));
            sc_reps.push_back(sc_acc / static_cast<double>(n));
        }
        const Aggregate tc_a = aggregate_of(tc_reps);
        const Aggregate sc_a = aggregate_of(sc_reps);
        doc["resampling"] = {
            {"reps", opt.reps},
            {"seed", opt.seed},
            {"tc", {{"values", tc_reps}, {"mean", tc_a.mean}, {"ci95", tc_a.ci95}}},
            {"sc", {{"values", sc_reps}, {"mean", sc_a.mean}, {"ci95", sc_a.ci95}}},
        };
    }

    write_report(opt.out, doc.dump(2) + "\n");
    return 0;
}

// ------------------------------------------------------------ build-stats

struct BuildStatsOptions {
    std::string corpus;
    std::string skeleton = "humanml3d22";
    std::string partition_file;
    std::string out;
    bool strict = false;
};

int cmd_build_stats(const BuildStatsOptions& opt) {
    PartitionMap partition;
    if (!opt.partition_file.empty()) {
        const SkeletonSpec* spec = find_skeleton(opt.skeleton);
        partition = load_partition_file(
            opt.partition_file, opt.skeleton,
            spec != nullptr ? spec->joint_count() : (1 << 20));
    } else {
        partition = default_partition(opt.skeleton);
    }
    const auto files = list_motion_files(opt.corpus);
    if (files.empty()) {
        throw ValidationError("no .json or .csv motion files in '" +
                              opt.corpus + "'");
    }
    std::vector<NamedSequence> corpus;
    std::vector<std::string> failures;
    for (const auto& [id, path] : files) {
        try {
            MotionSequence seq = load_motion_file(path);
            if (seq.skeleton_id != opt.skeleton) {
                throw ValidationError("declares skeleton '" + seq.skeleton_id +
                                      "', expected '" + opt.skeleton + "'");
            }
            corpus.push_back({id, std::move(seq)});
        } catch (const Error& e) {
            failures.push_back(id + ": " + e.what());
            log_warn("skipping '" + id + "': " + e.what());
        }
    }
    if (!failures.empty() && opt.strict) {
        std::fprintf(stderr, "validation failed on %zu file(s):\n",
                     failures.size());
        for (const auto& f : failures) {
            std::fprintf(stderr, "  %s\n", f.c_str());
        }
        return 1;
    }
    if (corpus.empty()) {
        std::fprintf(stderr, "no valid sequences in '%s'\n", opt.corpus.c_str());
        return 1;
    }
    const RefStats stats = build_reference_stats(corpus, partition);
    write_report(opt.out, ref_stats_to_json(stats));
    return 0;
}

// --------------------------------------------------------------- features

struct FeaturesOptions {
    std::string metric;
    std::string gen;
    std::string ref;
    std::string out;
    int reps = 20;
    std::uint64_t seed = 42;
    int k = 1;
    int pool_size = 32;
    int n_pairs = 300;
    int pairs_per_group = 10;
    std::string format = "json";
};

int cmd_features(const FeaturesOptions& opt) {
    const EmbeddingSet gen = load_embeddings_file(opt.gen);
    std::optional<EmbeddingSet> ref;
    if (!opt.ref.empty()) {
        ref = load_embeddings_file(opt.ref);
    }

    std::function<double(std::uint64_t)> run;
    json config = {
        {"metric", opt.metric}, {"gen", opt.gen},   {"reps", opt.reps},
        {"seed", opt.seed},     {"records", gen.size()},
    };
    if (opt.metric == "fid") {
        if (!ref.has_value()) {
            throw ValidationError("fid needs --ref");
        }
        config["ref"] = opt.ref;
        run = [&](std::uint64_t) { return fid(gen, *ref); };
    } else if (opt.metric == "rprecision") {
        config["k"] = opt.k;
        config["pool_size"] = opt.pool_size;
        run = [&](std::uint64_t s) {
            return r_precision(gen, opt.k, opt.pool_size, s);
        };
    } else if (opt.metric == "mmdist") {
        run = [&](std::uint64_t) { return mm_dist(gen); };
    } else if (opt.metric == "diversity") {
        config["n_pairs"] = opt.n_pairs;
        run = [&](std::uint64_t s) { return diversity(gen, opt.n_pairs, s); };
    } else if (opt.metric == "multimodality") {
        config["pairs_per_group"] = opt.pairs_per_group;
        run = [&](std::uint64_t s) {
            return multimodality(gen, opt.pairs_per_group, s);
        };
    } else {
        throw ValidationError("unknown metric '" + opt.metric + "'");
    }

    const MetricRun result = repeated_eval(opt.metric, run, opt.reps, opt.seed);

    if (opt.format == "csv") {
        std::string csv = "rep,value\n";
        char buf[64];
        for (std::size_t i = 0; i < result.values.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, result.values[i]);
            csv += buf;
        }
        write_report(opt.out, csv);
        return 0;
    }

    json doc;
    doc["metric"] = result.metric;
    doc["mean"] = result.mean;
    doc["ci95"] = result.ci95;
    doc["values"] = result.values;
    doc["config"] = std::move(config);
    write_report(opt.out, doc.dump(2) + "\n");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"motion coherence and embedding-space evaluation"};
    app.require_subcommand(1);

    CoherenceOptions coherence;
    CLI::App* c = app.add_subcommand(
        "coherence", "score motions for temporal and spatial coherence");
    c->add_option("--input", coherence.input, "directory of motion files")
        ->required();
    c->add_option("--skeleton", coherence.skeleton, "skeleton id");
    c->add_option("--partition", coherence.partition_file,
                  "partition override JSON");
    c->add_option("--params", coherence.params_file, "coherence params JSON");
    c->add_option("--stats", coherence.stats_file, "reference stats JSON")
        ->required();
    c->add_option("--out", coherence.out, "report path")->required();
    c->add_option("--seed", coherence.seed, "resampling seed");
    c->add_option("--reps", coherence.reps, "bootstrap repetitions");
    c->add_flag("--strict", coherence.strict, "fail on any invalid file");
    c->add_option("--jobs", coherence.jobs, "worker threads");
    c->add_option("--format", coherence.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));

    BuildStatsOptions build;
    CLI::App* b = app.add_subcommand(
        "build-stats", "estimate reference statistics from a corpus");
    b->add_option("--corpus", build.corpus, "directory of motion files")
        ->required();
    b->add_option("--skeleton", build.skeleton, "skeleton id");
    b->add_option("--partition", build.partition_file,
                  "partition override JSON");
    b->add_option("--out", build.out, "stats path")->required();
    b->add_flag("--strict", build.strict, "fail on any invalid file");

    FeaturesOptions features;
    CLI::App* f = app.add_subcommand(
        "features", "embedding-space metrics over dump files");
    f->require_subcommand(1);
    for (const char* name : {"fid", "rprecision", "mmdist", "diversity",
                             "multimodality"}) {
        CLI::App* m = f->add_subcommand(name);
        m->add_option("--gen", features.gen, "embedding JSON-lines file")
            ->required();
        m->add_option("--ref", features.ref, "reference embedding file");
        m->add_option("--out", features.out, "report path")->required();
        m->add_option("--reps", features.reps, "repetitions");
        m->add_option("--seed", features.seed, "base seed");
        m->add_option("--format", features.format, "json or csv")
            ->check(CLI::IsMember({"json", "csv"}));
        if (std::string(name) == "rprecision") {
            m->add_option("--k", features.k, "top-k")->check(CLI::Range(1, 3));
            m->add_option("--pool", features.pool_size, "candidate pool size");
        } else if (std::string(name) == "diversity") {
            m->add_option("--n-pairs", features.n_pairs, "sampled pairs");
        } else if (std::string(name) == "multimodality") {
            m->add_option("--pairs-per-group", features.pairs_per_group,
                          "pairs sampled per group");
        }
        m->callback([&features, name] { features.metric = name; });
    }

    std::uint64_t selftest_seed = 42;
    CLI::App* k = app.add_subcommand("kernels", "architecture kernel tools");
    k->require_subcommand(1);
    CLI::App* st =
        k->add_subcommand("selftest", "run the kernel property suite");
    st->add_option("--seed", selftest_seed, "seed for the property cases");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e); // prints help, exits 0
    } catch (const CLI::ParseError& e) {
        app.exit(e); // prints the error and usage hint
        return 1;
    }

    try {
        if (*c) return cmd_coherence(coherence);
        if (*b) return cmd_build_stats(build);
        if (*f) return cmd_features(features);
        if (*st) {
            const int failures = party::tools::run_kernels_selftest(selftest_seed);
            return failures == 0 ? 0 : 1;
        }
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return 2;
    }
    return 0;
}
