#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "groundrec/ingest.hpp"
#include "groundrec/tokenize.hpp"

namespace groundrec {

/// One row per catalog item (canonical index order), one column per dimension.
template <typename Scalar>
using EmbeddingMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using EmbeddingVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using EmbeddingMatrixf = EmbeddingMatrix<float>;
using EmbeddingVectorf = EmbeddingVector<float>;

/// Maps generated text to a fixed-dimension vector. Implementations must be
/// deterministic and safe to call concurrently.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual Eigen::Index dim() const = 0;
    virtual EmbeddingVectorf embed(const Tokens& tokens) const = 0;
    virtual std::string name() const = 0;

    EmbeddingVectorf embed_text(std::string_view text) const { return embed(tokenize(text)); }
};

/// Seeded 64-bit token hash (FNV-1a folded through a splitmix64 finalizer).
std::uint64_t hash_token(std::string_view token, std::uint64_t seed);

/// Bag of signed hashed tokens scaled by 1 / max(1, token count). Each token
/// lands in bucket hash % dim with sign taken from the top hash bit.
template <typename Scalar = float>
EmbeddingVector<Scalar> hash_embed(const Tokens& tokens, Eigen::Index dim, std::uint64_t seed) {
    if (dim < 1) throw UsageError("hash_embed: dim must be >= 1");
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim);
    for (const auto& tok : tokens) {
        const std::uint64_t h = hash_token(tok, seed);
        const auto bucket = static_cast<Eigen::Index>(h % static_cast<std::uint64_t>(dim));
        acc[bucket] += (h >> 63) ? -1.0 : 1.0;
    }
    acc /= static_cast<double>(std::max<std::size_t>(1, tokens.size()));
    return acc.cast<Scalar>();
}

template <typename Scalar = float>
EmbeddingVector<Scalar> hash_embed(std::string_view text, Eigen::Index dim, std::uint64_t seed) {
    return hash_embed<Scalar>(tokenize(text), dim, seed);
}

class HashEmbeddingProvider final : public EmbeddingProvider {
public:
    HashEmbeddingProvider(Eigen::Index dim, std::uint64_t seed);
    Eigen::Index dim() const override { return dim_; }
    EmbeddingVectorf embed(const Tokens& tokens) const override;
    std::string name() const override;

private:
    Eigen::Index dim_;
    std::uint64_t seed_;
};

/// Row i = provider.embed(title(i)).
EmbeddingMatrixf embed_catalog(const ItemCatalog& catalog, const EmbeddingProvider& provider);

/// Scales every non-zero row to unit L2 norm.
template <typename Derived>
void normalize_rows(Eigen::MatrixBase<Derived>& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const auto n = m.row(i).norm();
        if (n > 0) m.row(i) /= n;
    }
}

/// Binary format: "GREC", u32 dim (little-endian), then rows of dim f32
/// values in catalog order.
void write_embeddings_bin(const std::filesystem::path& path, const EmbeddingMatrixf& m);
/// TSV format: item_id \t v0 \t v1 ...
void write_embeddings_tsv(const std::filesystem::path& path, const EmbeddingMatrixf& m,
                          const ItemCatalog& catalog);

/// Loads either format (binary detected by its magic) aligned to `catalog`.
/// Throws DataError on missing or duplicate items, inconsistent dims and
/// non-finite values.
EmbeddingMatrixf load_embeddings(const std::filesystem::path& path, const ItemCatalog& catalog);
EmbeddingMatrixf load_embeddings_tsv_text(std::string_view text, const ItemCatalog& catalog);
EmbeddingMatrixf load_embeddings_bin_bytes(std::string_view bytes, const ItemCatalog& catalog);

}  // namespace groundrec
