#include "fedcmfs/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#include "fedcmfs/types.hpp"

namespace fedcmfs {

namespace {

// Shortest exact decimal form; reruns must produce byte-identical files.
std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string dataset_name(const RunConfig& cfg) {
    const std::string& p = cfg.dataset_path.empty() ? cfg.train_path : cfg.dataset_path;
    return std::filesystem::path(p).stem().string();
}

nlohmann::json selection_json(const SelectionResult& sel, const MultiLabelDataset& train) {
    nlohmann::json per_label = nlohmann::json::object();
    for (const auto& [label, features] : sel.per_label_pc) {
        nlohmann::json names = nlohmann::json::array();
        for (int32_t f : features) names.push_back(train.variable_name(f));
        per_label[train.variable_name(label)] = {{"indices", features}, {"names", names}};
    }
    nlohmann::json selected_names = nlohmann::json::array();
    for (int32_t f : sel.selected) selected_names.push_back(train.variable_name(f));

    nlohmann::json witnesses = nlohmann::json::array();
    for (const auto& w : sel.witnesses) {
        witnesses.push_back({{"label", train.variable_name(w.label)},
                             {"added_feature", train.variable_name(w.feature)},
                             {"s", w.s},
                             {"p_with", w.p_with},
                             {"p_without", w.p_without}});
    }

    return {{"selected_indices", sel.selected},
            {"selected_names", selected_names},
            {"per_label_pc", per_label},
            {"witnesses", witnesses}};
}

} // namespace

std::string cell_provenance_json(const CellResult& cell, const RunConfig& cfg,
                                 const MultiLabelDataset& train) {
    const RunProvenance& prov = cell.selection.provenance;
    nlohmann::json j{
        {"schema_version", 1},
        {"dataset", cell.dataset},
        {"n_clients", cell.n_clients},
        {"seed", cell.seed},
        {"params",
         {{"alpha", prov.alpha},
          {"k1", prov.k1},
          {"k2", prov.k2},
          {"max_cond", prov.max_cond},
          {"fraction_low", cfg.fraction_low},
          {"fraction_high", cfg.fraction_high},
          {"batch_size", prov.batch_size},
          {"cache_enabled", prov.cache_enabled},
          {"mlknn_k", cfg.mlknn_k},
          {"mlknn_smoothing", cfg.mlknn_smoothing}}},
        {"selection", selection_json(cell.selection, train)},
        {"metrics",
         {{"ap", cell.metrics.ap},
          {"cv", cell.metrics.cv},
          {"hl", cell.metrics.hl},
          {"rl", cell.metrics.rl},
          {"fma", cell.metrics.fma},
          {"fmi", cell.metrics.fmi}}},
        {"ci_tests",
         {{"per_client", prov.tests_per_client},
          {"total", prov.ci_tests_total},
          {"cache_hits", prov.cache_hits},
          {"cache_misses", prov.cache_misses}}},
        {"wall_seconds", cell.wall_seconds}};
    return j.dump(2);
}

void emit_report(const std::vector<CellResult>& cells, const RunConfig& cfg) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);

    const fs::path results_path = fs::path(cfg.out_dir) / "results.csv";
    std::ofstream out(results_path);
    if (!out) throw_data("cannot write " + results_path.string());
    out << "dataset,n_clients,seed,ap,cv,hl,rl,fma,fmi,n_selected,ci_tests_total,wall_seconds\n";
    for (const auto& c : cells) {
        out << c.dataset << ',' << c.n_clients << ',' << c.seed << ',' << fmt(c.metrics.ap) << ','
            << fmt(c.metrics.cv) << ',' << fmt(c.metrics.hl) << ',' << fmt(c.metrics.rl) << ','
            << fmt(c.metrics.fma) << ',' << fmt(c.metrics.fmi) << ',' << c.selection.selected.size() << ','
            << c.selection.provenance.ci_tests_total << ',' << fmt(c.wall_seconds) << '\n';
    }
    out.close();

    const fs::path summary_path = fs::path(cfg.out_dir) / "summary.csv";
    std::ofstream sum(summary_path);
    if (!sum) throw_data("cannot write " + summary_path.string());
    sum << "dataset,n_clients,n_seeds,ap,cv,hl,rl,fma,fmi,n_selected,ci_tests_total\n";
    for (int32_t n : cfg.n_clients_list) {
        double ap = 0, cv = 0, hl = 0, rl = 0, fma = 0, fmi = 0, nsel = 0, tests = 0;
        int count = 0;
        std::string name;
        for (const auto& c : cells) {
            if (c.n_clients != n) continue;
            name = c.dataset;
            ap += c.metrics.ap;
            cv += c.metrics.cv;
            hl += c.metrics.hl;
            rl += c.metrics.rl;
            fma += c.metrics.fma;
            fmi += c.metrics.fmi;
            nsel += static_cast<double>(c.selection.selected.size());
            tests += static_cast<double>(c.selection.provenance.ci_tests_total);
            ++count;
        }
        if (count == 0) continue;
        const double k = static_cast<double>(count);
        sum << name << ',' << n << ',' << count << ',' << fmt(ap / k) << ',' << fmt(cv / k) << ',' << fmt(hl / k)
            << ',' << fmt(rl / k) << ',' << fmt(fma / k) << ',' << fmt(fmi / k) << ',' << fmt(nsel / k) << ','
            << fmt(tests / k) << '\n';
    }
}

int run_experiment(const RunConfig& cfg) {
    cfg.validate();
    namespace fs = std::filesystem;

    const bool predefined = !cfg.train_path.empty();
    MultiLabelDataset full;
    MultiLabelDataset pre_train, pre_test;
    if (predefined) {
        pre_train = load_dataset(cfg.train_path, cfg.format, cfg.label_count, cfg.data_kind);
        pre_test = load_dataset(cfg.test_path, cfg.format, cfg.label_count, cfg.data_kind);
        if (pre_train.n_features() != pre_test.n_features() || pre_train.n_labels() != pre_test.n_labels())
            throw_data("train/test column sets do not match");
    } else {
        full = load_dataset(cfg.dataset_path, cfg.format, cfg.label_count, cfg.data_kind);
    }

    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (!fs::is_directory(cfg.out_dir)) throw_data("cannot create output directory: " + cfg.out_dir);

    FedParams params;
    params.alpha = cfg.alpha;
    params.k1 = cfg.k1;
    params.k2 = cfg.k2;
    params.max_cond = cfg.max_cond;
    params.fedcfr_pseudocode_phase1 = cfg.fedcfr_pseudocode_phase1;

    FederationOptions options;
    options.cache_enabled = cfg.cache_enabled;
    options.batch_size = cfg.batch_size;
    options.worker_threads = cfg.worker_threads;
    options.trace_messages = cfg.trace_messages;

    const std::string name = dataset_name(cfg);
    std::vector<CellResult> cells;
    for (int32_t n_clients : cfg.n_clients_list) {
        for (uint64_t seed : cfg.seeds) {
            const auto t0 = std::chrono::steady_clock::now();

            MultiLabelDataset train, test;
            if (predefined) {
                train = pre_train;
                test = pre_test;
            } else {
                std::tie(train, test) = train_test_split(full, cfg.test_fraction, seed);
            }

            PartitionPlan plan{n_clients, cfg.fraction_low, cfg.fraction_high, seed};

            CellResult cell;
            cell.dataset = name;
            cell.n_clients = n_clients;
            cell.seed = seed;

            const std::vector<ClientShard> shards = partition_clients(train, plan);

            if (cfg.trace_messages) {
                // Re-run through an explicit handle so the trace can be saved.
                FederationHandle handle(train, shards, options);
                std::vector<int32_t> labels;
                for (int32_t j = 0; j < train.n_labels(); ++j) labels.push_back(train.label_var(j).index);
                const auto pc = fedcfl(handle, labels, params);
                std::vector<RetrievalWitness> witnesses;
                const auto pc_sr = fedcfr(handle, pc, params, &witnesses);
                cell.selection = fedcfc(handle, pc_sr, params);
                cell.selection.witnesses = std::move(witnesses);
                RunProvenance& prov = cell.selection.provenance;
                prov.seed = seed;
                prov.alpha = params.alpha;
                prov.k1 = params.k1;
                prov.k2 = params.k2;
                prov.max_cond = params.max_cond;
                prov.n_clients = handle.n_clients();
                prov.batch_size = options.batch_size;
                prov.cache_enabled = options.cache_enabled;
                for (int32_t c = 0; c < handle.n_clients(); ++c)
                    prov.tests_per_client.push_back(handle.tests_executed(c));
                prov.ci_tests_total = handle.total_tests_executed();
                prov.cache_hits = handle.cache_hits();
                prov.cache_misses = handle.cache_misses();

                const fs::path trace_path = fs::path(cfg.out_dir) / ("trace_n" + std::to_string(n_clients) +
                                                                     "_s" + std::to_string(seed) + ".jsonl");
                std::ofstream tr(trace_path);
                for (const auto& line : handle.trace().lines()) tr << line << '\n';
            } else {
                cell.selection = run_fedcmfs(train, plan, params, options);
            }

            // The evaluator sees what the federation collectively holds: the
            // deduplicated union of the client shards.
            std::vector<int64_t> pooled_rows;
            for (const ClientShard& s : shards)
                pooled_rows.insert(pooled_rows.end(), s.row_indices.begin(), s.row_indices.end());
            std::sort(pooled_rows.begin(), pooled_rows.end());
            pooled_rows.erase(std::unique(pooled_rows.begin(), pooled_rows.end()), pooled_rows.end());
            const MultiLabelDataset pooled = train.subset(pooled_rows);

            const MlKnnModel model = mlknn_train(pooled, cell.selection.selected, cfg.mlknn_k, cfg.mlknn_smoothing);
            const PredictionSet pred = mlknn_predict(model, test);
            cell.metrics = compute_metrics(pred, LabelMatrix::from_dataset(test), cfg.raw_coverage);
            cell.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            cell.selection.provenance.wall_seconds = cell.wall_seconds;

            const fs::path prov_path = fs::path(cfg.out_dir) / ("cell_n" + std::to_string(n_clients) + "_s" +
                                                                std::to_string(seed) + ".json");
            std::ofstream pf(prov_path);
            if (!pf) throw_data("cannot write " + prov_path.string());
            pf << cell_provenance_json(cell, cfg, train) << '\n';

            cells.push_back(std::move(cell));
        }
    }

    emit_report(cells, cfg);
    return 0;
}

} // namespace fedcmfs
