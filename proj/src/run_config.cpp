#include "adamixup/run_config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "adamixup/csv.hpp"
#include "adamixup/idx.hpp"

namespace adamixup {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& value, const std::string& field) {
    try {
        size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ContractError("config: field '" + field + "' expects a number, got '" + value +
                            "'");
    }
}

int64_t parse_int(const std::string& value, const std::string& field) {
    try {
        size_t pos = 0;
        long long v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ContractError("config: field '" + field + "' expects an integer, got '" + value +
                            "'");
    }
}

bool parse_bool(const std::string& value, const std::string& field) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ContractError("config: field '" + field + "' expects true/false, got '" + value + "'");
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

} // namespace

Ini Ini::parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ContractError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    return parse(ss.str(), path);
}

Ini Ini::parse(const std::string& text, const std::string& origin) {
    Ini ini;
    std::istringstream is(text);
    std::string line;
    size_t lineno = 0;
    Section* current = nullptr;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ContractError("config: " + origin + ":" + std::to_string(lineno) +
                                    ": unterminated section header");
            }
            ini.sections.push_back({trim(line.substr(1, line.size() - 2)), {}});
            current = &ini.sections.back();
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos || current == nullptr) {
            throw ContractError("config: " + origin + ":" + std::to_string(lineno) +
                                ": expected 'key = value' inside a [section]");
        }
        current->entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return ini;
}

const std::string* Ini::find(const std::string& section, const std::string& key) const {
    for (const auto& s : sections) {
        if (s.name != section) continue;
        for (const auto& [k, v] : s.entries) {
            if (k == key) return &v;
        }
    }
    return nullptr;
}

void Ini::set(const std::string& section, const std::string& key, const std::string& value) {
    for (auto& s : sections) {
        if (s.name != section) continue;
        for (auto& [k, v] : s.entries) {
            if (k == key) {
                v = value;
                return;
            }
        }
        s.entries.emplace_back(key, value);
        return;
    }
    sections.push_back({section, {{key, value}}});
}

std::string Ini::serialize() const {
    std::ostringstream os;
    for (size_t i = 0; i < sections.size(); ++i) {
        if (i) os << "\n";
        os << "[" << sections[i].name << "]\n";
        for (const auto& [k, v] : sections[i].entries) os << k << " = " << v << "\n";
    }
    return os.str();
}

Dataset DatasetSpec::load_train() const {
    Dataset ds;
    switch (kind) {
        case Kind::Synthetic: ds = generate_synthetic(synthetic); break;
        case Kind::Idx: ds = load_idx(train_images, train_labels); break;
        case Kind::Csv: ds = load_csv(train_csv); break;
    }
    if (fraction < 1.0) ds = subsample(ds, fraction, subsample_seed);
    return ds;
}

Dataset DatasetSpec::load_test() const {
    switch (kind) {
        case Kind::Synthetic: {
            if (synthetic_test_per_class < 1) {
                throw ContractError("config: dataset.test_per_class must be >= 1");
            }
            SyntheticManifoldSpec test = synthetic;
            test.per_class = synthetic_test_per_class;
            test.seed = synthetic.seed + 1000003; // disjoint draw stream
            return generate_synthetic(test);
        }
        case Kind::Idx: return load_idx(test_images, test_labels);
        case Kind::Csv: return load_csv(test_csv);
    }
    throw ContractError("config: unreachable dataset kind");
}

Dataset DatasetSpec::load_single() const {
    switch (kind) {
        case Kind::Synthetic: return generate_synthetic(synthetic);
        case Kind::Idx: return load_idx(train_images, train_labels);
        case Kind::Csv: return load_csv(train_csv);
    }
    throw ContractError("config: unreachable dataset kind");
}

DatasetSpec DatasetSpec::parse_inline(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) {
        throw ContractError("data spec '" + spec +
                            "': expected synthetic:...|idx:<images>,<labels>|csv:<path>");
    }
    const std::string head = spec.substr(0, colon);
    const std::string rest = spec.substr(colon + 1);
    DatasetSpec out;
    if (head == "idx") {
        const auto comma = rest.find(',');
        if (comma == std::string::npos) {
            throw ContractError("data spec: idx form is idx:<images>,<labels>");
        }
        out.kind = Kind::Idx;
        out.train_images = rest.substr(0, comma);
        out.train_labels = rest.substr(comma + 1);
        return out;
    }
    if (head == "csv") {
        out.kind = Kind::Csv;
        out.train_csv = rest;
        return out;
    }
    if (head == "synthetic") {
        out.kind = Kind::Synthetic;
        std::istringstream is(rest);
        std::string item;
        while (std::getline(is, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) {
                throw ContractError("data spec: expected key=value, got '" + item + "'");
            }
            const std::string key = item.substr(0, eq), value = item.substr(eq + 1);
            if (key == "generator") out.synthetic.kind = manifold_kind_from_string(value);
            else if (key == "classes") out.synthetic.num_classes =
                static_cast<int>(parse_int(value, key));
            else if (key == "per_class") out.synthetic.per_class =
                static_cast<int>(parse_int(value, key));
            else if (key == "noise") out.synthetic.noise = parse_double(value, key);
            else if (key == "seed") out.synthetic.seed =
                static_cast<uint64_t>(parse_int(value, key));
            else throw ContractError("data spec: unknown key '" + key + "'");
        }
        return out;
    }
    throw ContractError("data spec: unknown kind '" + head + "'");
}

RunConfig RunConfig::from_file(const std::string& path) {
    return from_ini(Ini::parse_file(path), path);
}

RunConfig RunConfig::from_ini(const Ini& ini, const std::string& origin) {
    RunConfig cfg;

    static const std::vector<std::pair<std::string, std::vector<std::string>>> known{
        {"dataset",
         {"kind", "generator", "classes", "per_class", "noise", "seed", "test_per_class",
          "train_images", "train_labels", "test_images", "test_labels", "train_csv", "test_csv",
          "fraction", "subsample_seed"}},
        {"train",
         {"method", "k_max", "epochs", "batch_size", "learning_rate", "momentum", "weight_decay",
          "w_mix", "w_intr", "mixed_ratio", "beta_param", "seed", "use_discriminator",
          "train_trunk_in_intrusion", "oracle_radius"}},
        {"model", {"conv1", "conv2", "hidden"}},
        {"output", {"dir"}}};
    for (const auto& s : ini.sections) {
        auto section = std::find_if(known.begin(), known.end(),
                                    [&](const auto& k) { return k.first == s.name; });
        if (section == known.end()) {
            throw ContractError("config: " + origin + ": unknown section [" + s.name + "]");
        }
        for (const auto& [k, v] : s.entries) {
            if (std::find(section->second.begin(), section->second.end(), k) ==
                section->second.end()) {
                throw ContractError("config: " + origin + ": unknown key '" + s.name + "." + k +
                                    "'");
            }
        }
    }

    auto get = [&](const char* section, const char* key) { return ini.find(section, key); };
    auto field = [](const char* section, const char* key) {
        return std::string(section) + "." + key;
    };

    // [dataset]
    const std::string* kind = get("dataset", "kind");
    if (!kind) throw ContractError("config: " + origin + ": missing dataset.kind");
    if (*kind == "synthetic") {
        cfg.data.kind = DatasetSpec::Kind::Synthetic;
        if (const auto* v = get("dataset", "generator")) {
            cfg.data.synthetic.kind = manifold_kind_from_string(*v);
        }
        if (const auto* v = get("dataset", "classes")) {
            cfg.data.synthetic.num_classes = static_cast<int>(parse_int(*v, "dataset.classes"));
        }
        if (const auto* v = get("dataset", "per_class")) {
            cfg.data.synthetic.per_class = static_cast<int>(parse_int(*v, "dataset.per_class"));
        }
        if (const auto* v = get("dataset", "noise")) {
            cfg.data.synthetic.noise = parse_double(*v, "dataset.noise");
        }
        if (const auto* v = get("dataset", "seed")) {
            cfg.data.synthetic.seed = static_cast<uint64_t>(parse_int(*v, "dataset.seed"));
        }
        cfg.data.synthetic_test_per_class =
            get("dataset", "test_per_class")
                ? static_cast<int>(parse_int(*get("dataset", "test_per_class"),
                                             "dataset.test_per_class"))
                : std::max(1, cfg.data.synthetic.per_class / 5);
    } else if (*kind == "idx") {
        cfg.data.kind = DatasetSpec::Kind::Idx;
        for (auto [key, dst] : {std::pair{"train_images", &cfg.data.train_images},
                                {"train_labels", &cfg.data.train_labels},
                                {"test_images", &cfg.data.test_images},
                                {"test_labels", &cfg.data.test_labels}}) {
            const auto* v = get("dataset", key);
            if (!v) {
                throw ContractError("config: " + origin + ": missing " + field("dataset", key));
            }
            *dst = *v;
        }
    } else if (*kind == "csv") {
        cfg.data.kind = DatasetSpec::Kind::Csv;
        const auto* tr = get("dataset", "train_csv");
        const auto* te = get("dataset", "test_csv");
        if (!tr || !te) {
            throw ContractError("config: " + origin + ": csv datasets need train_csv and test_csv");
        }
        cfg.data.train_csv = *tr;
        cfg.data.test_csv = *te;
    } else {
        throw ContractError("config: " + origin + ": dataset.kind '" + *kind +
                            "' is not synthetic|idx|csv");
    }
    if (const auto* v = get("dataset", "fraction")) {
        cfg.data.fraction = parse_double(*v, "dataset.fraction");
    }
    if (const auto* v = get("dataset", "subsample_seed")) {
        cfg.data.subsample_seed =
            static_cast<uint64_t>(parse_int(*v, "dataset.subsample_seed"));
    }

    // [train]
    if (const auto* v = get("train", "method")) cfg.train.method = train_method_from_string(*v);
    if (const auto* v = get("train", "k_max")) {
        cfg.train.k_max = static_cast<int>(parse_int(*v, "train.k_max"));
    }
    if (const auto* v = get("train", "epochs")) {
        cfg.train.epochs = static_cast<int>(parse_int(*v, "train.epochs"));
    }
    if (const auto* v = get("train", "batch_size")) {
        cfg.train.sgd.batch_size = parse_int(*v, "train.batch_size");
    }
    if (const auto* v = get("train", "learning_rate")) {
        cfg.train.sgd.learning_rate = parse_double(*v, "train.learning_rate");
    }
    if (const auto* v = get("train", "momentum")) {
        cfg.train.sgd.momentum = parse_double(*v, "train.momentum");
    }
    if (const auto* v = get("train", "weight_decay")) {
        cfg.train.sgd.weight_decay = parse_double(*v, "train.weight_decay");
    }
    if (const auto* v = get("train", "w_mix")) cfg.train.w_mix = parse_double(*v, "train.w_mix");
    if (const auto* v = get("train", "w_intr")) {
        cfg.train.w_intr = parse_double(*v, "train.w_intr");
    }
    if (const auto* v = get("train", "mixed_ratio")) {
        cfg.train.mixed_ratio = parse_double(*v, "train.mixed_ratio");
    }
    if (const auto* v = get("train", "beta_param")) {
        cfg.train.beta_param = parse_double(*v, "train.beta_param");
    }
    if (const auto* v = get("train", "seed")) {
        cfg.train.seed = static_cast<uint64_t>(parse_int(*v, "train.seed"));
    }
    if (const auto* v = get("train", "use_discriminator")) {
        cfg.train.use_discriminator = parse_bool(*v, "train.use_discriminator");
    }
    if (const auto* v = get("train", "train_trunk_in_intrusion")) {
        cfg.train.train_trunk_in_intrusion = parse_bool(*v, "train.train_trunk_in_intrusion");
    }
    if (const auto* v = get("train", "oracle_radius")) {
        cfg.train.oracle_radius = parse_double(*v, "train.oracle_radius");
    }

    // [model]
    if (const auto* v = get("model", "conv1")) {
        cfg.train.model.conv1 = static_cast<int>(parse_int(*v, "model.conv1"));
    }
    if (const auto* v = get("model", "conv2")) {
        cfg.train.model.conv2 = static_cast<int>(parse_int(*v, "model.conv2"));
    }
    if (const auto* v = get("model", "hidden")) {
        cfg.train.model.hidden = static_cast<int>(parse_int(*v, "model.hidden"));
    }

    if (const auto* v = get("output", "dir")) cfg.output_dir = *v;

    cfg.train.validate();
    if (cfg.data.kind == DatasetSpec::Kind::Synthetic) cfg.data.synthetic.validate();
    if (!(cfg.data.fraction > 0.0) || cfg.data.fraction > 1.0) {
        throw ContractError("config: dataset.fraction must be in (0,1]");
    }
    return cfg;
}

Ini RunConfig::resolved() const {
    Ini ini;
    Ini::Section ds{"dataset", {}};
    switch (data.kind) {
        case DatasetSpec::Kind::Synthetic:
            ds.entries = {{"kind", "synthetic"},
                          {"generator", to_string(data.synthetic.kind)},
                          {"classes", std::to_string(data.synthetic.num_classes)},
                          {"per_class", std::to_string(data.synthetic.per_class)},
                          {"noise", format_double(data.synthetic.noise)},
                          {"seed", std::to_string(data.synthetic.seed)},
                          {"test_per_class", std::to_string(data.synthetic_test_per_class)}};
            break;
        case DatasetSpec::Kind::Idx:
            ds.entries = {{"kind", "idx"},
                          {"train_images", data.train_images},
                          {"train_labels", data.train_labels},
                          {"test_images", data.test_images},
                          {"test_labels", data.test_labels}};
            break;
        case DatasetSpec::Kind::Csv:
            ds.entries = {
                {"kind", "csv"}, {"train_csv", data.train_csv}, {"test_csv", data.test_csv}};
            break;
    }
    ds.entries.emplace_back("fraction", format_double(data.fraction));
    ds.entries.emplace_back("subsample_seed", std::to_string(data.subsample_seed));
    ini.sections.push_back(std::move(ds));

    ini.sections.push_back(
        {"train",
         {{"method", to_string(train.method)},
          {"k_max", std::to_string(train.k_max)},
          {"epochs", std::to_string(train.epochs)},
          {"batch_size", std::to_string(train.sgd.batch_size)},
          {"learning_rate", format_double(train.sgd.learning_rate)},
          {"momentum", format_double(train.sgd.momentum)},
          {"weight_decay", format_double(train.sgd.weight_decay)},
          {"w_mix", format_double(train.w_mix)},
          {"w_intr", format_double(train.w_intr)},
          {"mixed_ratio", format_double(train.mixed_ratio)},
          {"beta_param", format_double(train.beta_param)},
          {"seed", std::to_string(train.seed)},
          {"use_discriminator", train.use_discriminator ? "true" : "false"},
          {"train_trunk_in_intrusion", train.train_trunk_in_intrusion ? "true" : "false"},
          {"oracle_radius", format_double(train.oracle_radius)}}});
    ini.sections.push_back({"model",
                            {{"conv1", std::to_string(train.model.conv1)},
                             {"conv2", std::to_string(train.model.conv2)},
                             {"hidden", std::to_string(train.model.hidden)}}});
    ini.sections.push_back({"output", {{"dir", output_dir}}});
    return ini;
}

} // namespace adamixup
