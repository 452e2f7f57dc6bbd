#include "app/artifacts.hpp"

#include "common/error.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#ifndef OLYMP_VERSION
#define OLYMP_VERSION "0.0.0"
#endif

namespace olymp::app {

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

std::string file_sha256(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

Artifacts::Artifacts(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw DomainError("cannot create output directory '" + dir_.string() + "': " + ec.message());
}

void Artifacts::write(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DomainError("cannot write '" + path.string() + "'");
    out << content;
    out.close();
    if (!out) throw DomainError("write failed for '" + path.string() + "'");
    auto it = std::find_if(outputs_.begin(), outputs_.end(), [&](const Entry& e) { return e.name == name; });
    if (it == outputs_.end()) outputs_.push_back({name, name, sha256_hex(content)});
    else it->sha256 = sha256_hex(content);
}

void Artifacts::add_input(const std::string& role, const std::string& path) {
    inputs_.push_back({role, path, file_sha256(path)});
}

void Artifacts::add_builtin_input(const std::string& role, const std::string& content) {
    inputs_.push_back({role, "<builtin>", sha256_hex(content)});
}

nlohmann::ordered_json Artifacts::manifest(const std::string& command, const Config& config) const {
    nlohmann::ordered_json m;
    m["command"] = command;
    m["library_version"] = OLYMP_VERSION;
    m["config_hash"] = sha256_hex(config.canonical());
    m["config"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : config.values()) m["config"][k] = v;
    m["inputs"] = nlohmann::ordered_json::array();
    for (const auto& e : inputs_) m["inputs"].push_back({{"role", e.name}, {"path", e.path}, {"sha256", e.sha256}});
    m["outputs"] = nlohmann::ordered_json::array();
    for (const auto& e : outputs_) m["outputs"].push_back({{"file", e.name}, {"sha256", e.sha256}});
    return m;
}

std::string fmt(double v, int digits) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    std::string s = buf;
    if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

namespace {

std::string xml_escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace

std::string svg_line_chart(const std::string& title, const std::vector<std::pair<std::string, std::vector<double>>>& series,
                           const std::vector<double>& x) {
    const double w = 640, h = 360, left = 60, right = 20, top = 40, bottom = 40;
    double xmin = 0, xmax = 1, ymin = INFINITY, ymax = -INFINITY;
    std::size_t longest = 0;
    for (const auto& [name, ys] : series) {
        longest = std::max(longest, ys.size());
        for (double y : ys)
            if (std::isfinite(y)) {
                ymin = std::min(ymin, y);
                ymax = std::max(ymax, y);
            }
    }
    if (!x.empty()) {
        xmin = *std::min_element(x.begin(), x.end());
        xmax = *std::max_element(x.begin(), x.end());
    } else {
        xmax = longest > 1 ? static_cast<double>(longest - 1) : 1.0;
    }
    if (xmax == xmin) xmax = xmin + 1;
    if (!std::isfinite(ymin)) ymin = 0, ymax = 1;
    if (ymax == ymin) ymax = ymin + 1;
    auto px = [&](double v) { return left + (v - xmin) / (xmax - xmin) * (w - left - right); };
    auto py = [&](double v) { return h - bottom - (v - ymin) / (ymax - ymin) * (h - top - bottom); };
    static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
       << ' ' << h << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
       << xml_escape(title) << "</text>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << h - bottom << "\" x2=\"" << w - right << "\" y2=\"" << h - bottom
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << h - bottom
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << left - 4 << "\" y=\"" << top + 4 << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
       << "font-size=\"10\">" << fmt(ymax, 3) << "</text>\n";
    os << "<text x=\"" << left - 4 << "\" y=\"" << h - bottom << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
       << "font-size=\"10\">" << fmt(ymin, 3) << "</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto& [name, ys] = series[s];
        os << "<polyline fill=\"none\" stroke=\"" << colours[s % 6] << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < ys.size(); ++i) {
            if (!std::isfinite(ys[i])) continue;
            const double xv = x.empty() ? static_cast<double>(i) : x[i];
            os << (i ? " " : "") << fmt(px(xv), 2) << ',' << fmt(py(ys[i]), 2);
        }
        os << "\"/>\n";
        os << "<text x=\"" << w - right << "\" y=\"" << top + 14 * static_cast<double>(s) << "\" text-anchor=\"end\" "
           << "font-family=\"sans-serif\" font-size=\"10\" fill=\"" << colours[s % 6] << "\">" << xml_escape(name) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace olymp::app
