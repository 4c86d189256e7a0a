#include "dynamo/serialize.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "dynamo/error.hpp"
#include "dynamo/time.hpp"

namespace dynamo {

namespace {

constexpr char kMagic[8] = {'D', 'P', 'M', 'U', 'S', 'V', 'D', '1'};

template <typename T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw DataError("truncated model artifact");
    return v;
}

void put_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) put(out, m(i, j));
}

void take_matrix(std::istream& in, Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = take<double>(in);
}

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
    const auto r = rows.size();
    const auto c = r > 0 ? rows[0].size() : 0;
    Eigen::MatrixXd m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                rows[i][j].get<double>();
    return m;
}

}  // namespace

void save_svd_factors(const SvdFactors& f, const std::string& path, bool include_v) {
    atomic_write(path, [&](std::ostream& out) {
        out.write(kMagic, sizeof(kMagic));
        put<std::uint64_t>(out, f.q);
        put<std::uint64_t>(out, f.p);
        put<std::uint64_t>(out, f.tau);
        put<double>(out, f.dt);
        put<std::uint64_t>(out, static_cast<std::uint64_t>(f.S.size()));
        std::uint8_t flags = 0;
        if (include_v) flags |= 1;
        if (!f.origin_timestamps.empty()) flags |= 2;
        put<std::uint8_t>(out, flags);
        put_matrix(out, f.U);
        for (Eigen::Index i = 0; i < f.S.size(); ++i) put<double>(out, f.S(i));
        if (include_v) put_matrix(out, f.V);
        if (!f.origin_timestamps.empty())
            for (Timestamp t : f.origin_timestamps) put<std::int64_t>(out, t);
    });
}

SvdFactors load_svd_factors(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model artifact: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::string_view(magic, 8) != std::string_view(kMagic, 8))
        throw DataError("not a DPMUSVD1 artifact: " + path);

    SvdFactors f;
    f.q = take<std::uint64_t>(in);
    f.p = take<std::uint64_t>(in);
    f.tau = take<std::uint64_t>(in);
    f.dt = take<double>(in);
    const auto m = take<std::uint64_t>(in);
    const auto flags = take<std::uint8_t>(in);

    f.U.resize(static_cast<Eigen::Index>(f.q), static_cast<Eigen::Index>(m));
    take_matrix(in, f.U);
    f.S.resize(static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < f.S.size(); ++i) f.S(i) = take<double>(in);
    f.full_spectrum = f.S;
    if (flags & 1) {
        f.V.resize(static_cast<Eigen::Index>(f.p), static_cast<Eigen::Index>(m));
        take_matrix(in, f.V);
    }
    if (flags & 2) {
        f.origin_timestamps.resize(f.p);
        for (auto& t : f.origin_timestamps) t = take<std::int64_t>(in);
    }
    return f;
}

std::string havok_model_json(const HavokModel& m) {
    json j;
    j["A"] = matrix_to_json(m.A);
    j["B"] = json::array();
    for (Eigen::Index i = 0; i < m.B.size(); ++i) j["B"].push_back(m.B(i));
    j["r"] = m.r;
    j["dt"] = m.dt;
    j["residual"] = m.residual;
    return j.dump(2);
}

HavokModel havok_model_from_json(const std::string& text) {
    const json j = json::parse(text);
    HavokModel m;
    m.A = matrix_from_json(j.at("A"));
    const auto& b = j.at("B");
    m.B.resize(static_cast<Eigen::Index>(b.size()));
    for (std::size_t i = 0; i < b.size(); ++i)
        m.B(static_cast<Eigen::Index>(i)) = b[i].get<double>();
    m.r = j.at("r").get<std::size_t>();
    m.dt = j.at("dt").get<double>();
    m.residual = j.at("residual").get<double>();
    return m;
}

std::string sindy_model_json(const SindyModel& m) {
    json j;
    j["state_names"] = m.state_names;
    j["feature_names"] = m.feature_names;
    j["coefficients"] = matrix_to_json(m.coefficients);
    j["dt"] = m.dt;
    j["lambda"] = m.threshold;
    j["alpha"] = m.ridge;
    j["standardized"] = m.standardized;
    j["state_means"] = json::array();
    j["state_stds"] = json::array();
    for (Eigen::Index i = 0; i < m.state_means.size(); ++i) {
        j["state_means"].push_back(m.state_means(i));
        j["state_stds"].push_back(m.state_stds(i));
    }
    j["library"] = {
        {"polynomial_degree", m.library.polynomial_degree},
        {"include_constant", m.library.include_constant},
        {"include_trig", m.library.include_trig},
        {"trig_frequencies", m.library.trig_frequencies},
        {"pairwise_trig_differences", m.library.pairwise_trig_differences},
    };
    // readable governing equations: nonzero terms per state
    json eqs = json::object();
    for (Eigen::Index s = 0; s < m.coefficients.cols(); ++s) {
        json terms = json::object();
        for (Eigen::Index f = 0; f < m.coefficients.rows(); ++f)
            if (m.coefficients(f, s) != 0.0)
                terms[m.feature_names[static_cast<std::size_t>(f)]] =
                    m.coefficients(f, s);
        eqs["d/dt " + m.state_names[static_cast<std::size_t>(s)]] = std::move(terms);
    }
    j["equations"] = std::move(eqs);
    return j.dump(2);
}

SindyModel sindy_model_from_json(const std::string& text) {
    const json j = json::parse(text);
    SindyModel m;
    m.state_names = j.at("state_names").get<std::vector<std::string>>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.coefficients = matrix_from_json(j.at("coefficients"));
    m.dt = j.at("dt").get<double>();
    m.threshold = j.at("lambda").get<double>();
    m.ridge = j.at("alpha").get<double>();
    m.standardized = j.at("standardized").get<bool>();
    const auto& means = j.at("state_means");
    const auto& stds = j.at("state_stds");
    m.state_means.resize(static_cast<Eigen::Index>(means.size()));
    m.state_stds.resize(static_cast<Eigen::Index>(stds.size()));
    for (std::size_t i = 0; i < means.size(); ++i) {
        m.state_means(static_cast<Eigen::Index>(i)) = means[i].get<double>();
        m.state_stds(static_cast<Eigen::Index>(i)) = stds[i].get<double>();
    }
    const auto& lib = j.at("library");
    m.library.polynomial_degree = lib.at("polynomial_degree").get<int>();
    m.library.include_constant = lib.at("include_constant").get<bool>();
    m.library.include_trig = lib.at("include_trig").get<bool>();
    m.library.trig_frequencies = lib.at("trig_frequencies").get<std::vector<double>>();
    m.library.pairwise_trig_differences =
        lib.at("pairwise_trig_differences").get<bool>();
    return m;
}

std::string detection_report_json(const DetectionReport& r) {
    json j;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["f1"] = r.f1;
    j["accuracy"] = r.accuracy;
    j["mcc"] = r.mcc;
    if (r.has_auc) j["auc"] = r.auc;
    json d = json::array();
    if (r.degenerate.precision) d.push_back("precision");
    if (r.degenerate.recall) d.push_back("recall");
    if (r.degenerate.f1) d.push_back("f1");
    if (r.degenerate.accuracy) d.push_back("accuracy");
    if (r.degenerate.mcc) d.push_back("mcc");
    j["degenerate"] = std::move(d);
    return j.dump(2);
}

std::string regression_report_json(const RegressionReport& r) {
    json j;
    j["r2"] = r.r2;
    j["rmse"] = r.rmse;
    j["explained_variance"] = r.explained_variance;
    j["mae"] = r.mae;
    json d = json::array();
    if (r.degenerate.r2) d.push_back("r2");
    if (r.degenerate.explained_variance) d.push_back("explained_variance");
    j["degenerate"] = std::move(d);
    return j.dump(2);
}

void write_events_csv(const std::vector<AnomalyEvent>& events, std::ostream& out) {
    out << "channel,start,end,peak_forcing\n";
    for (const auto& ev : events)
        out << ev.channel << ',' << format_timestamp(ev.start) << ','
            << format_timestamp(ev.end) << ',' << format_value(ev.peak_forcing) << '\n';
}

void write_events_jsonl(const std::vector<AnomalyEvent>& events, std::ostream& out) {
    for (const auto& ev : events) {
        json j;
        j["channel"] = ev.channel;
        j["start"] = format_timestamp(ev.start);
        j["end"] = format_timestamp(ev.end);
        j["peak_forcing"] = ev.peak_forcing;
        j["peak_index"] = ev.peak_index;
        out << j.dump() << '\n';
    }
}

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file for hashing: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    return fnv1a_hex(bytes);
}

std::string manifest_json(const Manifest& m) {
    json j;
    j["tool_version"] = m.tool_version;
    j["config_hash"] = m.config_hash;
    j["input_hash"] = m.input_hash;
    j["created_at"] = m.created_at;
    return j.dump(2);
}

void atomic_write(const std::string& path,
                  const std::function<void(std::ostream&)>& writer) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot open output file: " + tmp);
        writer(out);
        if (!out) throw DataError("failed writing output file: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace dynamo
