#include "adamixup/runner.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "adamixup/checkpoint.hpp"
#include "adamixup/pgm.hpp"

namespace adamixup {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string metrics_header(const TrainConfig& cfg) {
    std::string header =
        "epoch,train_error,test_error,mean_alpha,mean_delta,mean_gamma,"
        "loss_d,loss_dp,loss_intr,oracle_rate";
    if (cfg.method == TrainMethod::AdaMixup) {
        for (int stage = 1; stage <= cfg.k_max - 1; ++stage) {
            header += ",alpha" + std::to_string(stage) + ",delta" + std::to_string(stage);
        }
    }
    return header;
}

std::string metrics_csv_line(const MetricsRow& row) {
    std::ostringstream os;
    os << row.epoch << "," << format_double(row.train_error) << ","
       << format_double(row.test_error) << "," << format_double(row.mean_alpha) << ","
       << format_double(row.mean_delta) << "," << format_double(row.mean_gamma) << ","
       << format_double(row.loss_d) << "," << format_double(row.loss_dp) << ","
       << format_double(row.loss_intr) << "," << format_double(row.oracle_rate);
    for (size_t i = 0; i < row.fold_alpha.size(); ++i) {
        os << "," << format_double(row.fold_alpha[i]) << "," << format_double(row.fold_delta[i]);
    }
    return os.str();
}

json metrics_json(const MetricsRow& row) {
    return json{{"epoch", row.epoch},
                {"train_error", row.train_error},
                {"test_error", row.test_error},
                {"mean_alpha", row.mean_alpha},
                {"mean_delta", row.mean_delta},
                {"mean_gamma", row.mean_gamma},
                {"loss_d", row.loss_d},
                {"loss_dp", row.loss_dp},
                {"loss_intr", row.loss_intr},
                {"oracle_rate", row.oracle_rate},
                {"fold_alpha", row.fold_alpha},
                {"fold_delta", row.fold_delta}};
}

constexpr double kMetaVersion = 1.0;

} // namespace

void save_model_checkpoint(const std::string& path, const Trainer& trainer,
                           const Dataset& train_ds) {
    const auto& cfg = trainer.config();
    const auto& shape = train_ds.feature_shape();
    const bool image = shape.size() == 3;
    auto meta = Tensor::vector({kMetaVersion,
                                image ? 1.0 : 0.0,
                                static_cast<double>(shape[0]),
                                image ? static_cast<double>(shape[1]) : 0.0,
                                image ? static_cast<double>(shape[2]) : 0.0,
                                static_cast<double>(cfg.model.conv1),
                                static_cast<double>(cfg.model.conv2),
                                static_cast<double>(cfg.model.hidden),
                                static_cast<double>(train_ds.num_classes),
                                static_cast<double>(static_cast<int>(cfg.method)),
                                static_cast<double>(cfg.k_max),
                                cfg.use_discriminator ? 1.0 : 0.0});
    meta->name = "meta/arch";
    auto tensors = trainer.checkpoint_tensors();
    tensors.insert(tensors.begin(), meta);
    save_checkpoint(path, tensors);
}

RestoredModel load_model_checkpoint(const std::string& path) {
    auto tensors = load_checkpoint(path);
    std::map<std::string, TensorPtr> by_name;
    for (const auto& t : tensors) by_name[t->name] = t;

    auto meta_it = by_name.find("meta/arch");
    if (meta_it == by_name.end() || meta_it->second->size() != 12 ||
        meta_it->second->values[0] != kMetaVersion) {
        throw FormatError("checkpoint '" + path + "': missing or unsupported meta/arch record");
    }
    const auto& mv = meta_it->second->values;

    RestoredModel model;
    const bool image = mv[1] != 0.0;
    model.feature_shape = image
                              ? std::vector<int64_t>{static_cast<int64_t>(mv[2]),
                                                     static_cast<int64_t>(mv[3]),
                                                     static_cast<int64_t>(mv[4])}
                              : std::vector<int64_t>{static_cast<int64_t>(mv[2])};
    model.train.model.conv1 = static_cast<int>(mv[5]);
    model.train.model.conv2 = static_cast<int>(mv[6]);
    model.train.model.hidden = static_cast<int>(mv[7]);
    model.num_classes = static_cast<int>(mv[8]);
    model.train.method = static_cast<TrainMethod>(static_cast<int>(mv[9]));
    model.train.k_max = static_cast<int>(mv[10]);
    model.train.use_discriminator = mv[11] != 0.0;

    model.trunk = std::make_shared<Trunk>(model.feature_shape, model.train.model, false,
                                          "trunk/", 0);
    model.classifier = std::make_unique<Classifier>(model.trunk, model.num_classes, 0);
    if (model.train.method == TrainMethod::AdaMixup) {
        model.generator = std::make_unique<PolicyRegionGenerator>(model.feature_shape,
                                                                  model.train.model, 0);
        if (model.train.use_discriminator) {
            model.discriminator = std::make_unique<IntrusionDiscriminator>(model.trunk, 0);
        }
    }

    auto restore = [&](const std::vector<TensorPtr>& params) {
        for (const auto& p : params) {
            auto it = by_name.find(p->name);
            if (it == by_name.end()) {
                throw FormatError("checkpoint '" + path + "': missing tensor '" + p->name + "'");
            }
            if (it->second->shape != p->shape) {
                throw FormatError("checkpoint '" + path + "': architecture mismatch for '" +
                                  p->name + "' (" + it->second->shape_str() + " vs " +
                                  p->shape_str() + ")");
            }
            p->values = it->second->values;
        }
    };
    restore(model.classifier->params());
    if (model.discriminator) restore(model.discriminator->head_params());
    if (model.generator) restore(model.generator->params());
    return model;
}

std::filesystem::path resolve_output_dir(const RunConfig& config,
                                         const std::string& config_path) {
    if (!config.output_dir.empty()) return config.output_dir;
    const char* root = std::getenv("ADAMIXUP_OUT_ROOT");
    return fs::path(root ? root : "runs") / fs::path(config_path).stem();
}

TrainRunResult run_train(const RunConfig& config) {
    if (config.output_dir.empty()) {
        throw ContractError("run_train: output directory not set");
    }
    const fs::path dir(config.output_dir);
    fs::create_directories(dir);
    {
        std::ofstream os(dir / "config.ini");
        os << config.resolved().serialize();
    }

    auto train_ds = config.data.load_train();
    auto test_ds = config.data.load_test();

    Trainer trainer(config.train, train_ds, test_ds);

    std::ofstream csv(dir / "metrics.csv");
    std::ofstream jsonl(dir / "metrics.jsonl");
    csv << metrics_header(config.train) << "\n";
    csv.flush();

    TrainRunResult result;
    result.run_dir = dir;
    result.artifacts = train(trainer, [&](const MetricsRow& row) {
        csv << metrics_csv_line(row) << "\n";
        csv.flush();
        jsonl << metrics_json(row).dump() << "\n";
        jsonl.flush();
    });

    save_model_checkpoint((dir / "checkpoint.amx").string(), trainer, train_ds);

    const auto& last = result.artifacts.metrics.back();
    json summary{{"method", to_string(config.train.method)},
                 {"epochs", config.train.epochs},
                 {"seed", config.train.seed},
                 {"protocol_window", result.artifacts.protocol_window},
                 {"final_test_error", result.artifacts.protocol_error},
                 {"final_epoch_test_error", last.test_error},
                 {"final_epoch_train_error", last.train_error},
                 {"mean_alpha", last.mean_alpha},
                 {"mean_delta", last.mean_delta},
                 {"mean_gamma", last.mean_gamma},
                 {"loss_d", last.loss_d},
                 {"loss_dp", last.loss_dp},
                 {"loss_intr", last.loss_intr},
                 {"oracle_rate", last.oracle_rate}};
    {
        std::ofstream os(dir / "summary.json");
        os << summary.dump(2) << "\n";
    }
    return result;
}

double run_eval(const std::string& checkpoint_path, const std::string& data_spec) {
    auto model = load_model_checkpoint(checkpoint_path);
    auto ds = DatasetSpec::parse_inline(data_spec).load_single();
    if (ds.feature_shape() != model.feature_shape) {
        throw ContractError("eval: dataset features " + ds.examples.front().features->shape_str() +
                            " do not match the checkpoint architecture");
    }
    if (ds.num_classes > model.num_classes) {
        throw ContractError("eval: dataset has more classes than the checkpoint model");
    }
    ds.num_classes = model.num_classes; // labels index into the model's classes
    return classifier_error_percent(*model.classifier, ds);
}

void run_export_mixed(const std::string& checkpoint_path, const std::string& data_spec,
                      int count, const std::string& out_dir, uint64_t seed) {
    if (count < 1) throw ContractError("export-mixed: count must be >= 1");
    auto model = load_model_checkpoint(checkpoint_path);
    if (!model.generator) {
        throw ContractError("export-mixed: checkpoint was not trained with method=adamixup");
    }
    auto ds = DatasetSpec::parse_inline(data_spec).load_single();
    if (ds.feature_shape() != model.feature_shape) {
        throw ContractError("export-mixed: dataset does not match the checkpoint architecture");
    }
    if (model.feature_shape.size() != 3 || model.feature_shape[0] != 1) {
        throw ContractError("export-mixed: needs single-channel image data");
    }
    const int64_t h = model.feature_shape[1], w = model.feature_shape[2];

    fs::create_directories(out_dir);
    Rng rng = Rng::stream(seed, "export-mixed");
    auto pairs = draw_pairs(ds.size(), static_cast<size_t>(count), rng);
    auto mixed = make_fold2_batch(*model.generator, ds, pairs, rng);

    std::ofstream labels(fs::path(out_dir) / "labels.csv");
    labels << "index";
    for (int c = 0; c < ds.num_classes; ++c) labels << ",p" << c;
    labels << "\n";
    char name[64];
    for (size_t i = 0; i < mixed.size(); ++i) {
        std::snprintf(name, sizeof(name), "pair_%03zu", i);
        const auto base = fs::path(out_dir) / name;
        write_pgm(base.string() + "_x1.pgm", h, w,
                  ds.examples[pairs[i].first].features->values);
        write_pgm(base.string() + "_x2.pgm", h, w,
                  ds.examples[pairs[i].second].features->values);
        write_pgm(base.string() + "_mix.pgm", h, w, mixed[i].features->values);
        labels << i;
        for (double p : mixed[i].soft_label.probs) labels << "," << format_double(p);
        labels << "\n";
    }
}

namespace {

struct GridAxis {
    std::string section;
    std::string key;
    std::vector<std::string> values;
};

std::vector<GridAxis> parse_grid(const std::string& grid_spec) {
    std::vector<GridAxis> axes;
    std::istringstream is(grid_spec);
    std::string part;
    while (std::getline(is, part, ';')) {
        if (part.empty()) continue;
        const auto eq = part.find('=');
        const auto dot = part.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
            throw ContractError("sweep: grid axis '" + part +
                                "' must look like section.key=v1,v2,...");
        }
        GridAxis axis;
        axis.section = part.substr(0, dot);
        axis.key = part.substr(dot + 1, eq - dot - 1);
        std::istringstream vs(part.substr(eq + 1));
        std::string v;
        while (std::getline(vs, v, ',')) {
            if (!v.empty()) axis.values.push_back(v);
        }
        if (axis.values.empty()) {
            throw ContractError("sweep: grid axis '" + part + "' has no values");
        }
        axes.push_back(std::move(axis));
    }
    if (axes.empty()) throw ContractError("sweep: empty grid");
    return axes;
}

} // namespace

std::filesystem::path run_sweep(const std::string& config_path, const std::string& grid_spec) {
    auto base_ini = Ini::parse_file(config_path);
    auto axes = parse_grid(grid_spec);
    auto base_config = RunConfig::from_ini(base_ini, config_path); // validates the base
    const fs::path sweep_root = resolve_output_dir(base_config, config_path);
    fs::create_directories(sweep_root);

    std::vector<size_t> index(axes.size(), 0);
    std::ofstream combined(sweep_root / "sweep.csv");
    for (const auto& axis : axes) combined << axis.section << "." << axis.key << ",";
    combined << "final_test_error,final_epoch_test_error,mean_alpha,mean_delta,loss_intr\n";

    for (;;) {
        Ini point = base_ini;
        std::string name;
        for (size_t a = 0; a < axes.size(); ++a) {
            const auto& value = axes[a].values[index[a]];
            point.set(axes[a].section, axes[a].key, value);
            if (!name.empty()) name += "_";
            name += axes[a].key + "-" + value;
        }
        auto config = RunConfig::from_ini(point, config_path);
        config.output_dir = (sweep_root / name).string();
        auto result = run_train(config);
        const auto& last = result.artifacts.metrics.back();
        for (size_t a = 0; a < axes.size(); ++a) combined << axes[a].values[index[a]] << ",";
        combined << format_double(result.artifacts.protocol_error) << ","
                 << format_double(last.test_error) << "," << format_double(last.mean_alpha)
                 << "," << format_double(last.mean_delta) << ","
                 << format_double(last.loss_intr) << "\n";
        combined.flush();

        size_t a = 0;
        for (; a < axes.size(); ++a) {
            if (++index[a] < axes[a].values.size()) break;
            index[a] = 0;
        }
        if (a == axes.size()) break;
    }
    return sweep_root;
}

namespace {

int guarded(const std::function<void()>& body) {
    try {
        body();
        return 0;
    } catch (const ContractError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace

int cmd_train(const std::string& config_path) {
    return guarded([&] {
        auto config = RunConfig::from_file(config_path);
        config.output_dir = resolve_output_dir(config, config_path).string();
        auto result = run_train(config);
        std::cout << "run dir: " << result.run_dir.string() << "\n"
                  << "final test error (median of last " << result.artifacts.protocol_window
                  << " epochs): " << format_double(result.artifacts.protocol_error) << "%\n";
    });
}

int cmd_eval(const std::string& checkpoint_path, const std::string& data_spec) {
    return guarded([&] {
        const double err = run_eval(checkpoint_path, data_spec);
        std::cout << "error rate: " << format_double(err) << "%\n";
    });
}

int cmd_export_mixed(const std::string& checkpoint_path, const std::string& data_spec,
                     int count, const std::string& out_dir, uint64_t seed) {
    return guarded([&] {
        run_export_mixed(checkpoint_path, data_spec, count, out_dir, seed);
        std::cout << "wrote " << count << " mixed triples to " << out_dir << "\n";
    });
}

int cmd_sweep(const std::string& config_path, const std::string& grid_spec) {
    return guarded([&] {
        auto root = run_sweep(config_path, grid_spec);
        std::cout << "sweep results in " << root.string() << "\n";
    });
}

} // namespace adamixup
