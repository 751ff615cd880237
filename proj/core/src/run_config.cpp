#include "fedcmfs/run_config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fedcmfs/types.hpp"

namespace fedcmfs {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw_config("config key '" + key + "': expected a boolean, got '" + v + "'");
}

double parse_double(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0') throw_config("config key '" + key + "': expected a number, got '" + v + "'");
    return x;
}

int64_t parse_int(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0') throw_config("config key '" + key + "': expected an integer, got '" + v + "'");
    return x;
}

template <typename T, typename Fn>
std::vector<T> parse_list(const std::string& key, const std::string& v, Fn&& one) {
    std::vector<T> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(one(key, item));
    }
    if (out.empty()) throw_config("config key '" + key + "': expected a non-empty comma list");
    return out;
}

} // namespace

const std::vector<std::string>& RunConfig::known_keys() {
    static const std::vector<std::string> keys = {
        "dataset", "format", "data_kind", "label_count", "n_clients", "seeds", "fraction_low", "fraction_high",
        "alpha", "k1", "k2", "max_cond", "test_fraction", "train_path", "test_path", "out_dir", "trace_messages",
        "raw_coverage", "fedcfr_pseudocode_phase1", "cache_enabled", "batch_size", "worker_threads", "mlknn_k",
        "mlknn_smoothing"};
    return keys;
}

void RunConfig::apply_key(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (key == "dataset") {
        dataset_path = v;
    } else if (key == "format") {
        if (v == "csv")
            format = FileFormat::Csv;
        else if (v == "arff")
            format = FileFormat::Arff;
        else
            throw_config("config key 'format': expected csv or arff, got '" + v + "'");
    } else if (key == "data_kind") {
        if (v == "discrete")
            data_kind = DataKind::Discrete;
        else if (v == "continuous")
            data_kind = DataKind::Continuous;
        else
            throw_config("config key 'data_kind': expected discrete or continuous, got '" + v + "'");
    } else if (key == "label_count") {
        label_count = static_cast<int32_t>(parse_int(key, v));
    } else if (key == "n_clients") {
        n_clients_list = parse_list<int32_t>(key, v, [](const std::string& k, const std::string& s) {
            return static_cast<int32_t>(parse_int(k, s));
        });
    } else if (key == "seeds") {
        seeds = parse_list<uint64_t>(key, v, [](const std::string& k, const std::string& s) {
            return static_cast<uint64_t>(parse_int(k, s));
        });
    } else if (key == "fraction_low") {
        fraction_low = parse_double(key, v);
    } else if (key == "fraction_high") {
        fraction_high = parse_double(key, v);
    } else if (key == "alpha") {
        alpha = parse_double(key, v);
    } else if (key == "k1") {
        k1 = parse_double(key, v);
    } else if (key == "k2") {
        k2 = parse_double(key, v);
    } else if (key == "max_cond") {
        max_cond = static_cast<int>(parse_int(key, v));
    } else if (key == "test_fraction") {
        test_fraction = parse_double(key, v);
    } else if (key == "train_path") {
        train_path = v;
    } else if (key == "test_path") {
        test_path = v;
    } else if (key == "out_dir") {
        out_dir = v;
    } else if (key == "trace_messages") {
        trace_messages = parse_bool(key, v);
    } else if (key == "raw_coverage") {
        raw_coverage = parse_bool(key, v);
    } else if (key == "fedcfr_pseudocode_phase1") {
        fedcfr_pseudocode_phase1 = parse_bool(key, v);
    } else if (key == "cache_enabled") {
        cache_enabled = parse_bool(key, v);
    } else if (key == "batch_size") {
        batch_size = static_cast<int32_t>(parse_int(key, v));
    } else if (key == "worker_threads") {
        worker_threads = static_cast<unsigned>(parse_int(key, v));
    } else if (key == "mlknn_k") {
        mlknn_k = static_cast<int>(parse_int(key, v));
    } else if (key == "mlknn_smoothing") {
        mlknn_smoothing = parse_double(key, v);
    } else {
        throw_config("unknown config key '" + key + "'");
    }
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw_config("cannot open config file: " + path);
    RunConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        const size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw_config("config line " + std::to_string(line_no) + " is not key=value: '" + s + "'");
        cfg.apply_key(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    }
    return cfg;
}

void RunConfig::apply_environment() {
    for (const std::string& key : known_keys()) {
        std::string env_name = "FEDCMFS_" + key;
        std::transform(env_name.begin(), env_name.end(), env_name.begin(), ::toupper);
        if (const char* v = std::getenv(env_name.c_str())) apply_key(key, v);
    }
}

void RunConfig::validate() const {
    const bool predefined = !train_path.empty() || !test_path.empty();
    if (predefined) {
        if (train_path.empty() || test_path.empty())
            throw_config("train_path and test_path must be set together");
    } else {
        if (dataset_path.empty()) throw_config("dataset path is required");
        if (!(test_fraction > 0.0) || !(test_fraction < 1.0)) throw_config("test_fraction must lie in (0, 1)");
    }
    if (label_count < 1) throw_config("label_count must be >= 1");
    if (n_clients_list.empty()) throw_config("n_clients list must be non-empty");
    for (int32_t n : n_clients_list)
        if (n < 1) throw_config("n_clients values must be >= 1");
    if (seeds.empty()) throw_config("seeds list must be non-empty");
    if (!(fraction_low > 0.0) || !(fraction_low <= fraction_high) || !(fraction_high <= 1.0))
        throw_config("fractions must satisfy 0 < fraction_low <= fraction_high <= 1");
    if (!(alpha > 0.0) || !(alpha < 1.0)) throw_config("alpha must lie in (0, 1)");
    if (!(k1 > 0.0) || k1 > 1.0) throw_config("k1 must lie in (0, 1]; the studied range is (0, 0.3]");
    if (!(k2 > 0.0) || k2 > 1.0) throw_config("k2 must lie in (0, 1]; the studied range is (0, 0.3]");
    if (max_cond < 1) throw_config("max_cond must be >= 1");
    if (batch_size < 1) throw_config("batch_size must be >= 1");
    if (mlknn_k < 1) throw_config("mlknn_k must be >= 1");
    if (!(mlknn_smoothing > 0.0)) throw_config("mlknn_smoothing must be > 0");
    if (out_dir.empty()) throw_config("out_dir must be non-empty");
}

} // namespace fedcmfs
