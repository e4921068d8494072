#include "groundrec/embed.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <unordered_map>

#include "groundrec/manifest.hpp"

namespace groundrec {

namespace {

constexpr char kMagic[4] = {'G', 'R', 'E', 'C'};

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

std::uint32_t get_u32(const char* p) {
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[k])) << (8 * k);
    return v;
}

[[noreturn]] void missing_items(const ItemCatalog& catalog, const std::vector<char>& seen) {
    std::string msg = "embeddings: missing rows for";
    int listed = 0;
    std::size_t missing = 0;
    for (std::size_t i = 0; i < seen.size(); ++i) {
        if (seen[i]) continue;
        ++missing;
        if (listed < 10) {
            msg += ' ' + catalog.item_id(static_cast<ItemIndex>(i));
            ++listed;
        }
    }
    if (missing > 10) msg += " ... (" + std::to_string(missing) + " total)";
    throw DataError(msg);
}

}  // namespace

std::uint64_t hash_token(std::string_view token, std::uint64_t seed) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : token) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return splitmix64(h ^ splitmix64(seed));
}

HashEmbeddingProvider::HashEmbeddingProvider(Eigen::Index dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
    if (dim < 1) throw UsageError("hash provider: dim must be >= 1");
}

EmbeddingVectorf HashEmbeddingProvider::embed(const Tokens& tokens) const {
    return hash_embed<float>(tokens, dim_, seed_);
}

std::string HashEmbeddingProvider::name() const {
    return "hash(dim=" + std::to_string(dim_) + ",seed=" + std::to_string(seed_) + ")";
}

EmbeddingMatrixf embed_catalog(const ItemCatalog& catalog, const EmbeddingProvider& provider) {
    EmbeddingMatrixf m(static_cast<Eigen::Index>(catalog.size()), provider.dim());
    for (std::size_t i = 0; i < catalog.size(); ++i) {
        const auto idx = static_cast<ItemIndex>(i);
        try {
            EmbeddingVectorf v = provider.embed_text(catalog.title(idx));
            if (v.size() != provider.dim()) throw DataError("provider returned wrong dimension");
            m.row(static_cast<Eigen::Index>(i)) = v.transpose();
        } catch (const std::exception& e) {
            throw DataError("embedding item " + catalog.item_id(idx) + ": " + e.what());
        }
    }
    return m;
}

void write_embeddings_bin(const std::filesystem::path& path, const EmbeddingMatrixf& m) {
    std::string out(kMagic, 4);
    put_u32(out, static_cast<std::uint32_t>(m.cols()));
    out.reserve(8 + static_cast<std::size_t>(m.size()) * 4);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) put_u32(out, std::bit_cast<std::uint32_t>(m(i, j)));
    }
    write_file(path, out);
}

void write_embeddings_tsv(const std::filesystem::path& path, const EmbeddingMatrixf& m,
                          const ItemCatalog& catalog) {
    std::string out;
    char buf[64];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out += catalog.item_id(static_cast<ItemIndex>(i));
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            auto [p, ec] = std::to_chars(buf, buf + sizeof buf, m(i, j));
            out += '\t';
            out.append(buf, p);
        }
        out += '\n';
    }
    write_file(path, out);
}

EmbeddingMatrixf load_embeddings_bin_bytes(std::string_view bytes, const ItemCatalog& catalog) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw DataError("embeddings: missing GREC header");
    }
    const std::uint32_t dim = get_u32(bytes.data() + 4);
    if (dim == 0) throw DataError("embeddings: dim is 0");
    const std::size_t payload = bytes.size() - 8;
    const std::size_t row_bytes = std::size_t{dim} * 4;
    if (payload % row_bytes != 0) throw DataError("embeddings: payload is not a whole number of rows");
    const std::size_t rows = payload / row_bytes;
    if (rows != catalog.size()) {
        throw DataError("embeddings: " + std::to_string(rows) + " rows for a catalog of " +
                        std::to_string(catalog.size()) + " items");
    }
    EmbeddingMatrixf m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
    const char* p = bytes.data() + 8;
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < dim; ++j, p += 4) {
            const float v = std::bit_cast<float>(get_u32(p));
            if (!std::isfinite(v)) {
                throw DataError("embeddings: non-finite value in row " + catalog.item_id(static_cast<ItemIndex>(i)));
            }
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        }
    }
    return m;
}

EmbeddingMatrixf load_embeddings_tsv_text(std::string_view text, const ItemCatalog& catalog) {
    std::vector<std::vector<float>> rows(catalog.size());
    std::vector<char> seen(catalog.size(), 0);
    std::size_t dim = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(start, nl - start);
        start = nl + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        const auto f = split_tabs(line);
        const auto idx = catalog.find(f[0]);
        if (!idx) continue;  // rows for items outside the catalog are ignored
        if (seen[*idx]) throw DataError("embeddings: duplicate row for " + std::string(f[0]));
        seen[*idx] = 1;
        const std::size_t row_dim = f.size() - 1;
        if (row_dim == 0) throw DataError("embeddings: empty row for " + std::string(f[0]));
        if (dim == 0) dim = row_dim;
        if (row_dim != dim) {
            throw DataError("embeddings: row " + std::string(f[0]) + " has dim " + std::to_string(row_dim) +
                            ", expected " + std::to_string(dim));
        }
        auto& row = rows[*idx];
        row.resize(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            const auto s = f[j + 1];
            float v = 0;
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc{} || p != s.data() + s.size()) {
                throw DataError("embeddings: unparsable value in row " + std::string(f[0]));
            }
            if (!std::isfinite(v)) throw DataError("embeddings: non-finite value in row " + std::string(f[0]));
            row[j] = v;
        }
    }
    for (char s : seen) {
        if (!s) missing_items(catalog, seen);
    }
    EmbeddingMatrixf m(static_cast<Eigen::Index>(catalog.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        m.row(static_cast<Eigen::Index>(i)) =
            Eigen::Map<const Eigen::RowVectorXf>(rows[i].data(), static_cast<Eigen::Index>(dim));
    }
    return m;
}

EmbeddingMatrixf load_embeddings(const std::filesystem::path& path, const ItemCatalog& catalog) {
    const std::string bytes = read_file(path);
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) == 0) {
        return load_embeddings_bin_bytes(bytes, catalog);
    }
    return load_embeddings_tsv_text(bytes, catalog);
}

}  // namespace groundrec
