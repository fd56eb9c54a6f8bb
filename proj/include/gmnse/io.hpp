#pragma once

#include <openssl/evp.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gmnse/integrator.hpp"

namespace gmnse {

struct IoError : Error {
    using Error::Error;
};

using json = nlohmann::json;

// --- field snapshot format -------------------------------------------------
//
// Little-endian binary, bit-exact round trip:
//   magic   "GMNSEFLD"            8 bytes
//   version u32 = 1
//   n       u32
//   count   u64  number of stored modes per component (n * n * (n/2+1))
//   data    3 * count * (re, im) f64, components outermost, modes in linear
//           index order idx = (i1*n + i2)*(n/2+1) + i3.

inline void write_field(const std::filesystem::path& path, const SpectralField& u) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    const char magic[8] = {'G', 'M', 'N', 'S', 'E', 'F', 'L', 'D'};
    std::uint32_t version = 1, n = u.grid->n;
    std::uint64_t count = u.grid->nspec;
    os.write(magic, 8);
    os.write(reinterpret_cast<const char*>(&version), 4);
    os.write(reinterpret_cast<const char*>(&n), 4);
    os.write(reinterpret_cast<const char*>(&count), 8);
    for (int d = 0; d < 3; ++d)
        os.write(reinterpret_cast<const char*>(u.comp[d].data()),
                 static_cast<std::streamsize>(count * sizeof(complex)));
    if (!os) throw IoError("write failed: " + path.string());
}

inline SpectralField read_field(const std::filesystem::path& path,
                                std::shared_ptr<const Grid> grid) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for reading: " + path.string());
    char magic[8];
    std::uint32_t version = 0, n = 0;
    std::uint64_t count = 0;
    is.read(magic, 8);
    if (std::memcmp(magic, "GMNSEFLD", 8) != 0)
        throw IoError("bad magic in " + path.string());
    is.read(reinterpret_cast<char*>(&version), 4);
    if (version != 1) throw IoError("unsupported snapshot version");
    is.read(reinterpret_cast<char*>(&n), 4);
    is.read(reinterpret_cast<char*>(&count), 8);
    if (static_cast<int>(n) != grid->n || count != grid->nspec)
        throw IoError("snapshot grid mismatch in " + path.string());
    SpectralField u(std::move(grid));
    for (int d = 0; d < 3; ++d) {
        is.read(reinterpret_cast<char*>(u.comp[d].data()),
                static_cast<std::streamsize>(count * sizeof(complex)));
        if (!is) throw IoError("truncated snapshot: " + path.string());
    }
    return u;
}

// --- CSV -------------------------------------------------------------------

inline std::string format_real(real v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

/// One CSV per series with a JSON sidecar documenting the columns; empty
/// series are an error and no file is created.
inline void write_csv(const std::filesystem::path& path,
                      const std::vector<std::string>& columns,
                      const std::vector<std::vector<real>>& rows,
                      const std::string& description = "") {
    if (rows.empty()) throw IoError("refusing to write empty series: " + path.string());
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    for (std::size_t c = 0; c < columns.size(); ++c)
        os << columns[c] << (c + 1 < columns.size() ? "," : "\n");
    for (const auto& row : rows) {
        if (row.size() != columns.size())
            throw IoError("csv row width mismatch: " + path.string());
        for (std::size_t c = 0; c < row.size(); ++c)
            os << format_real(row[c]) << (c + 1 < row.size() ? "," : "\n");
    }
    if (!os) throw IoError("write failed: " + path.string());
    json schema;
    schema["columns"] = columns;
    if (!description.empty()) schema["description"] = description;
    std::ofstream ss(path.string() + ".schema.json");
    ss << schema.dump(2) << "\n";
}

inline void write_diagnostics_csv(const std::filesystem::path& path,
                                  const std::vector<DiagRow>& diag) {
    std::vector<std::vector<real>> rows;
    rows.reserve(diag.size());
    for (const auto& d : diag)
        rows.push_back({d.t, d.norm_h, d.norm_v, d.norm_l4, d.norm_h38, d.fn});
    write_csv(path, {"t", "norm_H", "norm_V", "norm_L4", "norm_H38", "FN"}, rows,
              "per-step diagnostics");
}

// --- hashing and manifest ----------------------------------------------------

inline std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot hash missing file: " + path.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    std::vector<char> buf(1 << 16);
    while (is) {
        is.read(buf.data(), buf.size());
        EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(is.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i)
        os << std::hex << std::setfill('0') << std::setw(2) << int(digest[i]);
    return os.str();
}

/// manifest.json: every produced file with its content hash, sorted by path.
inline json write_manifest(const std::filesystem::path& out_dir,
                           std::vector<std::filesystem::path> files) {
    std::sort(files.begin(), files.end());
    json manifest;
    manifest["files"] = json::array();
    for (const auto& f : files) {
        std::string ext = f.extension().string();
        std::string kind = ext == ".csv"   ? "csv"
                           : ext == ".json" ? "json"
                           : ext == ".fld"  ? "field"
                                            : "other";
        manifest["files"].push_back({{"path", std::filesystem::relative(f, out_dir).string()},
                                     {"sha256", sha256_file(f)},
                                     {"kind", kind}});
    }
    std::ofstream os(out_dir / "manifest.json");
    os << manifest.dump(2) << "\n";
    return manifest;
}

}  // namespace gmnse
