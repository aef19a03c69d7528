#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "ocfd/forest.hpp"

namespace ocfd::forest {

namespace {

constexpr const char* kMagic = "ocfd-forest";

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    std::istringstream next(const std::string& expected_key) {
        std::string line;
        if (!std::getline(in_, line)) fail("unexpected end of model file, expected '" + expected_key + "'");
        ++line_no_;
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key != expected_key) fail("expected '" + expected_key + "', found '" + key + "'");
        return ss;
    }

    std::istringstream next_any(std::string& key) {
        std::string line;
        if (!std::getline(in_, line)) fail("unexpected end of model file");
        ++line_no_;
        std::istringstream ss(line);
        ss >> key;
        return ss;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ModelFormatError("model line " + std::to_string(line_no_) + ": " + msg);
    }

    template <typename T>
    T read(std::istringstream& ss, const char* what) const {
        T v{};
        if (!(ss >> v)) fail(std::string("cannot read ") + what);
        return v;
    }

    double read_real(std::istringstream& ss, const char* what) const {
        std::string token;
        if (!(ss >> token)) fail(std::string("cannot read ") + what);
        char* end = nullptr;
        const double v = std::strtod(token.c_str(), &end);
        if (end == token.c_str() || *end != '\0') fail(std::string("malformed ") + what + " '" + token + "'");
        return v;
    }

    FaultLabel read_label(std::istringstream& ss) const {
        const auto token = read<std::string>(ss, "label");
        try {
            return FaultLabel::parse(token);
        } catch (const std::invalid_argument& e) {
            fail(e.what());
        }
    }

private:
    std::istream& in_;
    std::size_t line_no_ = 0;
};

// Reads one preorder subtree, returning nothing; nodes are appended.
void read_subtree(Reader& r, std::vector<Node>& nodes, std::size_t width, std::size_t remaining_budget) {
    if (nodes.size() >= remaining_budget) r.fail("tree has more nodes than declared");
    std::string kind;
    auto ss = r.next_any(kind);
    if (kind == "L") {
        Node leaf;
        leaf.label = r.read_label(ss);
        nodes.push_back(leaf);
        return;
    }
    if (kind != "I") r.fail("expected node line 'I' or 'L', found '" + kind + "'");
    Node internal;
    const auto feature = r.read<long long>(ss, "feature index");
    if (feature < 0 || static_cast<std::size_t>(feature) >= width) r.fail("feature index out of range");
    internal.feature = static_cast<std::int32_t>(feature);
    internal.threshold = r.read_real(ss, "threshold");
    const std::size_t self = nodes.size();
    nodes.push_back(internal);
    read_subtree(r, nodes, width, remaining_budget);
    nodes[self].right = static_cast<std::int32_t>(nodes.size());
    read_subtree(r, nodes, width, remaining_budget);
}

}  // namespace

void save_model(const RandomForestModel& model, std::ostream& out) {
    out << kMagic << ' ' << model.format_version << '\n';
    out << "n_trees " << model.n_trees() << '\n';
    out << "n_features " << model.width() << '\n';
    out << "feature_names";
    for (const auto& n : model.feature_names) out << ' ' << n;
    out << '\n';
    out << "scaler";
    for (double s : model.scaler.scale) out << ' ' << format_real(s);
    out << '\n';
    out << "labels";
    for (FaultLabel l : model.label_universe) out << ' ' << l.to_string();
    out << '\n';
    out << "seed " << model.seed << '\n';
    out << "params m_try " << model.m_try << " max_depth " << model.stop.max_depth << " min_samples_leaf "
        << model.stop.min_samples_leaf << '\n';
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        const auto& nodes = model.trees[t].nodes();
        out << "tree " << t << ' ' << nodes.size() << '\n';
        for (const Node& n : nodes) {
            if (n.is_leaf()) {
                out << "L " << n.label.to_string() << '\n';
            } else {
                out << "I " << n.feature << ' ' << format_real(n.threshold) << '\n';
            }
        }
    }
    out << "end\n";
}

RandomForestModel load_model(std::istream& in) {
    Reader r(in);
    RandomForestModel m;

    auto header = r.next(kMagic);
    m.format_version = r.read<int>(header, "format version");
    if (m.format_version != RandomForestModel::kFormatVersion) {
        throw ModelVersionError("unsupported model format_version " + std::to_string(m.format_version) +
                                " (expected " + std::to_string(RandomForestModel::kFormatVersion) + ")");
    }

    auto ss = r.next("n_trees");
    const auto n_trees = r.read<std::size_t>(ss, "n_trees");
    if (n_trees == 0) r.fail("n_trees must be >= 1");
    ss = r.next("n_features");
    const auto width = r.read<std::size_t>(ss, "n_features");
    if (width == 0) r.fail("n_features must be >= 1");

    ss = r.next("feature_names");
    for (std::string name; ss >> name;) m.feature_names.push_back(name);
    if (m.feature_names.size() != width) r.fail("feature_names count does not match n_features");

    ss = r.next("scaler");
    for (std::size_t j = 0; j < width; ++j) {
        const double s = r.read_real(ss, "scaler entry");
        if (!(s > 0.0)) r.fail("scaler entries must be > 0");
        m.scaler.scale.push_back(s);
    }

    ss = r.next("labels");
    for (std::string token; ss >> token;) {
        try {
            m.label_universe.push_back(FaultLabel::parse(token));
        } catch (const std::invalid_argument& e) {
            r.fail(e.what());
        }
    }
    if (m.label_universe.empty()) r.fail("empty label universe");
    if (!std::is_sorted(m.label_universe.begin(), m.label_universe.end()) ||
        std::adjacent_find(m.label_universe.begin(), m.label_universe.end()) != m.label_universe.end()) {
        r.fail("label universe must be sorted and unique");
    }

    ss = r.next("seed");
    m.seed = r.read<std::uint64_t>(ss, "seed");

    ss = r.next("params");
    for (std::string key; ss >> key;) {
        if (key == "m_try") {
            m.m_try = r.read<std::size_t>(ss, "m_try");
        } else if (key == "max_depth") {
            m.stop.max_depth = r.read<int>(ss, "max_depth");
        } else if (key == "min_samples_leaf") {
            m.stop.min_samples_leaf = r.read<std::size_t>(ss, "min_samples_leaf");
        } else {
            r.fail("unknown parameter '" + key + "'");
        }
    }

    for (std::size_t t = 0; t < n_trees; ++t) {
        ss = r.next("tree");
        const auto index = r.read<std::size_t>(ss, "tree index");
        if (index != t) r.fail("trees out of order");
        const auto declared = r.read<std::size_t>(ss, "node count");
        std::vector<Node> nodes;
        nodes.reserve(declared);
        read_subtree(r, nodes, width, declared);
        if (nodes.size() != declared) r.fail("tree node count does not match its header");
        for (const Node& n : nodes) {
            if (n.is_leaf() &&
                !std::binary_search(m.label_universe.begin(), m.label_universe.end(), n.label)) {
                r.fail("leaf label " + n.label.to_string() + " not in the label universe");
            }
        }
        m.trees.emplace_back(std::move(nodes));
    }
    r.next("end");
    return m;
}

void save_model_file(const RandomForestModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    save_model(model, out);
    if (!out) throw std::runtime_error("failed writing model to '" + path + "'");
}

RandomForestModel load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file '" + path + "'");
    return load_model(in);
}

}  // namespace ocfd::forest
