#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace tpplab {

// One realization on [0, T]: strictly increasing event times with 0 < t_i <= T.
// Events at exactly t = 0 are disallowed (intensities are conditioned on the
// strict past, and the empty-history convention pins t_0 = 0).
struct EventSequence {
    std::vector<double> t;
    double T = 0.0;

    std::size_t size() const { return t.size(); }
    // number of events strictly before time x, i.e. N(x-) for x in (0, T]
    std::size_t count_before(double x) const;
    // index j with x in (t_j, t_{j+1}], using t_0 = 0 and t_{N+1} = T
    std::size_t interval_index(double x) const { return count_before(x); }
};

// throws ConfigError describing the first violation
void validate_sequence(const EventSequence& s);

// JSONL: one {"t": [...], "T": ...} object per line; reader validates every record
std::vector<EventSequence> read_jsonl(const std::string& path);
void write_jsonl(const std::string& path, const std::vector<EventSequence>& seqs);

} // namespace tpplab
