#include "ope/logged_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ope {

std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::runtime_error("format_double failed");
    return std::string(buf, p);
}

static double parse_double(const std::string& s) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{}) throw std::runtime_error("bad numeric field: " + s);
    return v;
}

std::vector<int> LoggedDataset::observed_dims() const {
    std::vector<int> out;
    for (int k = 0; k < embed_dims(); ++k)
        if (std::find(withheld_dims.begin(), withheld_dims.end(), k) == withheld_dims.end())
            out.push_back(k);
    return out;
}

void LoggedDataset::validate() const {
    if (records.empty()) throw std::invalid_argument("LoggedDataset: needs at least one record");
    if (num_actions < 1) throw std::invalid_argument("LoggedDataset: num_actions < 1");
    for (const auto& r : records) {
        if (r.action < 0 || r.action >= num_actions)
            throw std::invalid_argument("LoggedDataset: action id out of range");
        if (!(r.logging_propensity > 0.0 && r.logging_propensity <= 1.0))
            throw std::invalid_argument("LoggedDataset: logging propensity must lie in (0,1]");
        if (r.embedding.size() != embedding_cardinalities.size())
            throw std::invalid_argument("LoggedDataset: embedding length mismatch");
        for (std::size_t k = 0; k < r.embedding.size(); ++k)
            if (r.embedding[k] < 0 || r.embedding[k] >= embedding_cardinalities[k])
                throw std::invalid_argument("LoggedDataset: embedding entry out of range");
        if (!std::isfinite(r.reward)) throw std::invalid_argument("LoggedDataset: non-finite reward");
    }
    for (int d : withheld_dims)
        if (d < 0 || d >= embed_dims())
            throw std::invalid_argument("LoggedDataset: withheld dim out of range");
}

void save_dataset(const LoggedDataset& data, const std::string& csv_path) {
    data.validate();
    std::ofstream f(csv_path);
    if (!f) throw std::runtime_error("save_dataset: cannot open " + csv_path);
    const int dx = data.context_dim();
    const int de = data.embed_dims();
    for (int j = 0; j < dx; ++j) f << "x_" << j << ",";
    f << "action,";
    for (int k = 0; k < de; ++k) f << "e_" << k << ",";
    f << "reward,pscore\n";
    for (const auto& r : data.records) {
        for (int j = 0; j < dx; ++j) f << format_double(r.context[j]) << ",";
        f << r.action << ",";
        for (int k = 0; k < de; ++k) f << r.embedding[k] << ",";
        f << format_double(r.reward) << "," << format_double(r.logging_propensity) << "\n";
    }

    std::ofstream m(csv_path + ".meta");
    if (!m) throw std::runtime_error("save_dataset: cannot open " + csv_path + ".meta");
    m << "num_actions=" << data.num_actions << "\n";
    m << "embedding_cardinalities=";
    for (std::size_t k = 0; k < data.embedding_cardinalities.size(); ++k)
        m << (k ? " " : "") << data.embedding_cardinalities[k];
    m << "\nwithheld_dims=";
    for (std::size_t k = 0; k < data.withheld_dims.size(); ++k)
        m << (k ? " " : "") << data.withheld_dims[k];
    m << "\n";
}

static std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream iss(line);
    while (std::getline(iss, cur, sep)) out.push_back(cur);
    return out;
}

LoggedDataset load_dataset(const std::string& csv_path) {
    LoggedDataset data;
    {
        std::ifstream m(csv_path + ".meta");
        if (!m) throw std::runtime_error("load_dataset: cannot open " + csv_path + ".meta");
        std::string line;
        while (std::getline(m, line)) {
            auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = line.substr(0, eq);
            std::istringstream vals(line.substr(eq + 1));
            if (key == "num_actions") {
                vals >> data.num_actions;
            } else if (key == "embedding_cardinalities") {
                int v;
                while (vals >> v) data.embedding_cardinalities.push_back(v);
            } else if (key == "withheld_dims") {
                int v;
                while (vals >> v) data.withheld_dims.push_back(v);
            }
        }
    }
    std::ifstream f(csv_path);
    if (!f) throw std::runtime_error("load_dataset: cannot open " + csv_path);
    std::string header;
    if (!std::getline(f, header)) throw std::runtime_error("load_dataset: empty file");
    const auto cols = split(header, ',');
    int dx = 0;
    while (dx < static_cast<int>(cols.size()) && cols[dx].rfind("x_", 0) == 0) ++dx;
    const int de = static_cast<int>(data.embedding_cardinalities.size());

    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        if (static_cast<int>(fields.size()) != dx + de + 3)
            throw std::runtime_error("load_dataset: malformed row");
        LoggedRecord r;
        r.context.resize(dx);
        int i = 0;
        for (int j = 0; j < dx; ++j) r.context[j] = parse_double(fields[i++]);
        r.action = static_cast<int>(parse_double(fields[i++]));
        r.embedding.resize(de);
        for (int k = 0; k < de; ++k) r.embedding[k] = static_cast<int>(parse_double(fields[i++]));
        r.reward = parse_double(fields[i++]);
        r.logging_propensity = parse_double(fields[i++]);
        data.records.push_back(std::move(r));
    }
    data.validate();
    return data;
}

} // namespace ope
