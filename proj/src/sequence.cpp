#include "tpplab/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "tpplab/errors.hpp"

namespace tpplab {

std::size_t EventSequence::count_before(double x) const {
    return static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), x) - t.begin());
}

void validate_sequence(const EventSequence& s) {
    if (!(s.T > 0.0) || !std::isfinite(s.T)) {
        throw ConfigError("sequence: horizon T must be finite and positive");
    }
    double prev = 0.0;
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        const double ti = s.t[i];
        if (!std::isfinite(ti)) throw ConfigError("sequence: non-finite event time");
        if (!(ti > prev)) {
            throw ConfigError(i == 0 ? "sequence: events must satisfy t_1 > 0"
                                     : "sequence: event times must be strictly increasing");
        }
        if (ti > s.T) throw ConfigError("sequence: event time beyond horizon T");
        prev = ti;
    }
}

std::vector<EventSequence> read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<EventSequence> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw IoError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("t") || !j.contains("T")) {
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": record must be {\"t\": [...], \"T\": ...}");
        }
        EventSequence s;
        s.T = j.at("T").get<double>();
        s.t = j.at("t").get<std::vector<double>>();
        try {
            validate_sequence(s);
        } catch (const ConfigError& e) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        out.push_back(std::move(s));
    }
    return out;
}

void write_jsonl(const std::string& path, const std::vector<EventSequence>& seqs) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    for (const auto& s : seqs) {
        nlohmann::json j;
        j["t"] = s.t;
        j["T"] = s.T;
        out << j.dump() << "\n";
    }
    if (!out) throw IoError("write failed for " + path);
}

} // namespace tpplab
