#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "labdx/errors.hpp"
#include "labdx/tensor.hpp"

namespace labdx {

using BoolGrid = std::vector<BoolVec>;
using Grid = std::vector<std::vector<double>>;

struct LabEvent {
    std::string episode_id;
    std::string patient_id;
    int day = 0;                              // day index within the episode
    int test_id = 0;                          // in [0, M)
    std::variant<double, std::string> value;  // numeric or categorical token
};

struct LabSequence {
    Grid values;    // T x M
    BoolGrid mask;  // T x M, true = observed
    int label = 0;  // class in [0, C)
    std::string episode_id;

    std::size_t days() const { return values.size(); }
    std::size_t tests() const { return values.empty() ? 0 : values[0].size(); }
};

struct MaskedVector {
    std::vector<double> values;
    BoolVec mask;
};

struct NormStats {
    std::vector<double> mean;
    std::vector<double> std_dev;
    BoolVec degenerate;  // never observed or constant in the training split
    std::map<int, std::map<std::string, double>> category_map;
};

struct DatasetSplit {
    std::vector<LabSequence> train, dev, test;
    unsigned long seed = 0;
};

struct EventSchema {
    int num_tests = 0;
    std::map<int, std::map<std::string, double>> categorical;

    bool is_categorical(int test_id) const { return categorical.count(test_id) > 0; }
};

struct IngestResult {
    std::vector<LabSequence> sequences;
    std::size_t dropped_short = 0;             // episodes with < 2 distinct days
    std::vector<std::size_t> per_test_counts;  // observation frequency report
};

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

// Groups events by episode and day (same-day duplicates of one test are
// averaged). Episodes with fewer than 2 distinct days are dropped and counted.
// Labels, when provided, are looked up by episode id (default 0).
inline IngestResult ingest_events(const std::vector<LabEvent>& events,
                                  const EventSchema& schema,
                                  const std::map<std::string, int>& labels = {}) {
    const int M = schema.num_tests;
    struct Cell {
        double sum = 0.0;
        int count = 0;
    };
    // episode -> day -> test -> accumulator; std::map keeps days sorted.
    std::map<std::string, std::map<int, std::map<int, Cell>>> grouped;
    std::vector<std::string> episode_order;
    IngestResult out;
    out.per_test_counts.assign(M, 0);

    for (const auto& ev : events) {
        if (ev.day < 0) throw DataError("event with negative day in episode " + ev.episode_id);
        if (ev.test_id < 0 || ev.test_id >= M) {
            throw DataError("event test_id " + std::to_string(ev.test_id) +
                            " outside [0," + std::to_string(M) + ")");
        }
        double v;
        if (std::holds_alternative<double>(ev.value)) {
            v = std::get<double>(ev.value);
        } else {
            const std::string& tok = std::get<std::string>(ev.value);
            auto cit = schema.categorical.find(ev.test_id);
            if (cit == schema.categorical.end()) {
                throw DataError("token '" + tok + "' for non-categorical test " +
                                std::to_string(ev.test_id));
            }
            auto tit = cit->second.find(tok);
            if (tit == cit->second.end()) {
                throw DataError("unknown categorical token '" + tok + "' for test " +
                                std::to_string(ev.test_id));
            }
            v = tit->second;
        }
        if (grouped.find(ev.episode_id) == grouped.end()) {
            episode_order.push_back(ev.episode_id);
        }
        auto& cell = grouped[ev.episode_id][ev.day][ev.test_id];
        cell.sum += v;
        cell.count += 1;
        out.per_test_counts[ev.test_id] += 1;
    }

    for (const auto& ep : episode_order) {
        const auto& days = grouped[ep];
        if (days.size() < 2) {
            ++out.dropped_short;
            continue;
        }
        LabSequence seq;
        seq.episode_id = ep;
        auto lit = labels.find(ep);
        seq.label = lit == labels.end() ? 0 : lit->second;
        for (const auto& [day, tests] : days) {
            std::vector<double> row(M, 0.0);
            BoolVec mrow(M, 0);
            for (const auto& [t, cell] : tests) {
                row[t] = cell.sum / cell.count;
                mrow[t] = 1;
            }
            seq.values.push_back(std::move(row));
            seq.mask.push_back(std::move(mrow));
        }
        out.sequences.push_back(std::move(seq));
    }
    return out;
}

inline LabSequence truncate_latest(const LabSequence& seq, std::size_t max_days = 100) {
    if (seq.days() <= max_days) return seq;
    LabSequence out;
    out.label = seq.label;
    out.episode_id = seq.episode_id;
    out.values.assign(seq.values.end() - max_days, seq.values.end());
    out.mask.assign(seq.mask.end() - max_days, seq.mask.end());
    return out;
}

// ---------------------------------------------------------------------------
// Normalization (statistics from the training split only)
// ---------------------------------------------------------------------------

inline NormStats fit_normalization(const std::vector<LabSequence>& train) {
    if (train.empty()) throw DataError("fit_normalization: empty training split");
    const std::size_t M = train[0].tests();
    std::vector<double> sum(M, 0.0), sumsq(M, 0.0);
    std::vector<std::size_t> count(M, 0);
    for (const auto& seq : train) {
        for (std::size_t t = 0; t < seq.days(); ++t) {
            for (std::size_t m = 0; m < M; ++m) {
                if (!seq.mask[t][m]) continue;
                sum[m] += seq.values[t][m];
                sumsq[m] += seq.values[t][m] * seq.values[t][m];
                ++count[m];
            }
        }
    }
    NormStats st;
    st.mean.assign(M, 0.0);
    st.std_dev.assign(M, 1.0);
    st.degenerate.assign(M, 0);
    for (std::size_t m = 0; m < M; ++m) {
        if (count[m] == 0) {
            st.degenerate[m] = 1;
            continue;
        }
        st.mean[m] = sum[m] / static_cast<double>(count[m]);
        // population variance
        const double var =
            sumsq[m] / static_cast<double>(count[m]) - st.mean[m] * st.mean[m];
        if (var > 1e-24) {
            st.std_dev[m] = std::sqrt(var);
        } else {
            st.degenerate[m] = 1;  // constant: std substituted with 1
        }
    }
    return st;
}

inline LabSequence apply_normalization(const LabSequence& seq, const NormStats& st) {
    LabSequence out = seq;
    for (std::size_t t = 0; t < out.days(); ++t) {
        for (std::size_t m = 0; m < out.tests(); ++m) {
            out.values[t][m] = out.mask[t][m]
                                   ? (out.values[t][m] - st.mean[m]) / st.std_dev[m]
                                   : 0.0;
        }
    }
    return out;
}

// Time-average of observed entries per test; never-observed tests stay 0 with
// mask false.
inline MaskedVector average_sequence(const LabSequence& seq) {
    const std::size_t M = seq.tests();
    MaskedVector v;
    v.values.assign(M, 0.0);
    v.mask.assign(M, 0);
    std::vector<std::size_t> count(M, 0);
    for (std::size_t t = 0; t < seq.days(); ++t) {
        for (std::size_t m = 0; m < M; ++m) {
            if (!seq.mask[t][m]) continue;
            v.values[m] += seq.values[t][m];
            ++count[m];
        }
    }
    for (std::size_t m = 0; m < M; ++m) {
        if (count[m] > 0) {
            v.values[m] /= static_cast<double>(count[m]);
            v.mask[m] = 1;
        }
    }
    return v;
}

// Deterministic 65/15/20 split by episode. Train takes floor(0.65N), dev
// round(0.15N), test the remainder.
inline DatasetSplit split_dataset(const std::vector<LabSequence>& seqs,
                                  unsigned long seed) {
    if (seqs.size() < 10) throw DataError("split_dataset: need at least 10 episodes");
    const std::size_t n = seqs.size();
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::floor(0.65 * static_cast<double>(n)));
    const auto n_dev = static_cast<std::size_t>(std::llround(0.15 * static_cast<double>(n)));
    DatasetSplit split;
    split.seed = seed;
    for (std::size_t i = 0; i < n; ++i) {
        const LabSequence& s = seqs[idx[i]];
        if (i < n_train) {
            split.train.push_back(s);
        } else if (i < n_train + n_dev) {
            split.dev.push_back(s);
        } else {
            split.test.push_back(s);
        }
    }
    return split;
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

inline EventSchema load_schema(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open schema file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("schema parse error in " + path + ": " + e.what());
    }
    EventSchema s;
    s.num_tests = j.at("num_tests").get<int>();
    if (j.contains("categorical")) {
        for (auto& [key, m] : j.at("categorical").items()) {
            int tid = std::stoi(key);
            for (auto& [tok, val] : m.items()) {
                s.categorical[tid][tok] = val.get<double>();
            }
        }
    }
    return s;
}

// CSV with header: episode_id,patient_id,day,test_id,value
inline std::vector<LabEvent> read_events_csv(const std::string& path,
                                             const EventSchema& schema) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open events file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty events file: " + path);
    if (line != "episode_id,patient_id,day,test_id,value") {
        throw DataError("unexpected events header: " + line);
    }
    std::vector<LabEvent> events;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string ep, pat, day_s, test_s, val_s;
        if (!std::getline(ss, ep, ',') || !std::getline(ss, pat, ',') ||
            !std::getline(ss, day_s, ',') || !std::getline(ss, test_s, ',') ||
            !std::getline(ss, val_s)) {
            throw DataError("malformed events row at line " + std::to_string(lineno));
        }
        LabEvent ev;
        ev.episode_id = ep;
        ev.patient_id = pat;
        try {
            ev.day = std::stoi(day_s);
            ev.test_id = std::stoi(test_s);
        } catch (const std::exception&) {
            throw DataError("bad day/test_id at line " + std::to_string(lineno));
        }
        if (schema.is_categorical(ev.test_id)) {
            ev.value = val_s;
        } else {
            try {
                std::size_t pos = 0;
                double d = std::stod(val_s, &pos);
                if (pos != val_s.size()) throw std::invalid_argument(val_s);
                ev.value = d;
            } catch (const std::exception&) {
                throw DataError("non-numeric value '" + val_s + "' at line " +
                                std::to_string(lineno));
            }
        }
        events.push_back(std::move(ev));
    }
    return events;
}

inline nlohmann::json sequence_to_json(const LabSequence& seq) {
    nlohmann::json j;
    j["episode_id"] = seq.episode_id;
    j["label"] = seq.label;
    j["values"] = seq.values;
    nlohmann::json mask = nlohmann::json::array();
    for (const auto& row : seq.mask) {
        mask.push_back(std::vector<int>(row.begin(), row.end()));
    }
    j["mask"] = mask;
    return j;
}

inline LabSequence sequence_from_json(const nlohmann::json& j) {
    LabSequence seq;
    seq.episode_id = j.at("episode_id").get<std::string>();
    seq.label = j.at("label").get<int>();
    seq.values = j.at("values").get<Grid>();
    for (const auto& row : j.at("mask")) {
        BoolVec m;
        for (const auto& v : row) m.push_back(static_cast<std::uint8_t>(v.get<int>()));
        seq.mask.push_back(std::move(m));
    }
    if (seq.mask.size() != seq.values.size()) {
        throw DataError("sequence " + seq.episode_id + ": mask/values shape mismatch");
    }
    return seq;
}

// Line-delimited JSON, one episode per line.
inline void write_dataset(const std::string& path,
                          const std::vector<LabSequence>& seqs) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write dataset file: " + path);
    for (const auto& seq : seqs) out << sequence_to_json(seq).dump() << "\n";
}

inline std::vector<LabSequence> read_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file: " + path);
    std::vector<LabSequence> seqs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            seqs.push_back(sequence_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw DataError("dataset parse error at line " + std::to_string(lineno) +
                            ": " + e.what());
        }
    }
    return seqs;
}

}  // namespace labdx
