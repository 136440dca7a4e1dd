// Artifact emission: CSV with round-trip decimal formatting, raw
// little-endian field dumps with JSON sidecars, and the run manifest with
// FNV-1a checksums of every written file.
#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "thinfilm/config.hpp"
#include "thinfilm/grid.hpp"

namespace thinfilm {

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

class ArtifactWriter {
public:
    explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    const std::filesystem::path& dir() const { return dir_; }

    void write_text(const std::string& name, const std::string& content) {
        std::ofstream out(dir_ / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + (dir_ / name).string());
        out << content;
        files_.push_back({name, content.size(), fnv1a64(content)});
    }

    void write_csv(const std::string& name, const std::string& header,
                   const std::vector<std::vector<double>>& rows) {
        std::string content = header + "\n";
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) content += ',';
                content += format_g17(row[i]);
            }
            content += '\n';
        }
        write_text(name, content);
    }

    // CSV rows with a leading label column
    void write_labeled_csv(const std::string& name, const std::string& header,
                           const std::vector<std::pair<std::string,
                                                       std::vector<double>>>& rows) {
        std::string content = header + "\n";
        for (const auto& [label, vals] : rows) {
            content += label;
            for (double v : vals) {
                content += ',';
                content += format_g17(v);
            }
            content += '\n';
        }
        write_text(name, content);
    }

    // `index per axis..., value` rows
    void write_field_csv(const std::string& name, const ScalarField& f) {
        const Grid& g = *f.grid();
        std::string header;
        for (int d = 0; d < g.dimension(); ++d)
            header += "i" + std::to_string(d) + ",";
        header += "value";
        std::string content = header + "\n";
        std::vector<int> idx;
        for (std::size_t lin = 0; lin < f.size(); ++lin) {
            g.unravel(lin, idx);
            for (int d = 0; d < g.dimension(); ++d)
                content += std::to_string(idx[d]) + ",";
            content += format_g17(f[lin]);
            content += '\n';
        }
        write_text(name, content);
    }

    // raw little-endian doubles in row-major order plus a JSON sidecar
    void write_field_raw(const std::string& stem, const ScalarField& f) {
        const Grid& g = *f.grid();
        std::string bytes(f.size() * sizeof(double), '\0');
        static_assert(sizeof(double) == 8);
        std::memcpy(bytes.data(), f.values().data(), bytes.size());
        write_text(stem + ".f64", bytes);

        nlohmann::ordered_json meta;
        meta["layout"] = "row-major";
        meta["scalar"] = "float64-little-endian";
        meta["dimension"] = g.dimension();
        for (int d = 0; d < g.dimension(); ++d) {
            meta["points"].push_back(g.points(d));
            meta["extent"].push_back(g.extent(d));
        }
        meta["boundary"] =
            g.boundary() == Boundary::periodic ? "periodic" : "neumann-box";
        write_text(stem + ".meta.json", meta.dump(2) + "\n");
    }

    void write_manifest(const RunConfig& cfg, int exit_code,
                        const std::string& note = "") {
        nlohmann::ordered_json m;
        m["tool"] = "thinfilm";
        m["subcommand"] = cfg.subcommand;
        m["seed"] = cfg.seed;
        m["exit_code"] = exit_code;
        if (!note.empty()) m["note"] = note;
        nlohmann::ordered_json echo;
        for (const auto& [k, v] : cfg.echo()) echo[k] = v;
        m["config"] = echo;
        for (const auto& f : files_) {
            nlohmann::ordered_json entry;
            entry["name"] = f.name;
            entry["bytes"] = f.bytes;
            char hex[24];
            std::snprintf(hex, sizeof hex, "%016llx",
                          static_cast<unsigned long long>(f.checksum));
            entry["fnv1a64"] = hex;
            m["files"].push_back(entry);
        }
        std::ofstream out(dir_ / "manifest.json", std::ios::binary);
        out << m.dump(2) << "\n";
    }

private:
    struct Entry {
        std::string name;
        std::size_t bytes;
        std::uint64_t checksum;
    };
    std::filesystem::path dir_;
    std::vector<Entry> files_;
};

} // namespace thinfilm
