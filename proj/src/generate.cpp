#include "groundrec/generate.hpp"

#include <charconv>

#include "groundrec/embed.hpp"
#include "groundrec/manifest.hpp"

namespace groundrec {

GeneratedText OracleEchoGenerator::generate(const SequenceSample& sample) const {
    const auto idx = catalog_.find(sample.target);
    if (!idx) throw DataError("oracle generator: target " + sample.target + " is not in the catalog");
    GeneratedText out{tokenize(catalog_.title(*idx)), name()};
    if (out.tokens.empty()) throw DataError("oracle generator: title of " + sample.target + " has no tokens");
    return out;
}

PopTitleGenerator::PopTitleGenerator(const PopularityTable& table, const ItemCatalog& catalog)
    : catalog_(catalog), order_(table.order_by_count()) {
    if (order_.empty()) throw DataError("pop generator: empty popularity table");
    if (order_.size() != catalog.size()) throw DataError("pop generator: table does not match catalog");
}

GeneratedText PopTitleGenerator::generate(const SequenceSample& sample) const {
    ItemIndex pick = order_.front();
    for (ItemIndex i : order_) {
        if (!sample.known_items.contains(catalog_.item_id(i))) {
            pick = i;
            break;
        }
    }
    return {tokenize(catalog_.title(pick)), name()};
}

NGramModel train_ngram(const std::vector<Tokens>& titles, std::size_t order) {
    if (order < 1) throw UsageError("ngram order must be >= 1");
    NGramModel model;
    model.order = order;
    model.corpus_id = std::to_string(titles.size()) + " titles";
    for (const auto& t : titles) {
        for (std::size_t i = 0; i < t.size(); ++i) {
            const std::size_t ctx_len = std::min(order, i + 1);
            Tokens ctx(t.begin() + static_cast<std::ptrdiff_t>(i + 1 - ctx_len),
                       t.begin() + static_cast<std::ptrdiff_t>(i + 1));
            const std::string& next = i + 1 < t.size() ? t[i + 1] : std::string(kEndOfText);
            model.transitions[std::move(ctx)][next] += 1.0;
        }
    }
    return model;
}

Tokens ngram_walk(const NGramModel& model, const Tokens& prefix, std::uint64_t seed) {
    if (model.empty()) throw DataError("ngram: empty model");
    Tokens out(prefix.begin(), prefix.begin() + static_cast<std::ptrdiff_t>(std::min(model.order, prefix.size())));
    for (std::size_t step = 0; out.size() < kMaxGeneratedTokens; ++step) {
        const std::size_t ctx_len = std::min(model.order, out.size());
        if (ctx_len == 0) break;
        const Tokens ctx(out.end() - static_cast<std::ptrdiff_t>(ctx_len), out.end());
        const auto it = model.transitions.find(ctx);
        if (it == model.transitions.end()) break;
        double best = -1.0;
        std::vector<const std::string*> ties;
        for (const auto& [tok, w] : it->second) {
            if (w > best) {
                best = w;
                ties.clear();
            }
            if (w == best) ties.push_back(&tok);
        }
        const std::string* next = ties.front();
        if (ties.size() > 1) {
            const auto h = hash_token(join_tokens(ctx) + "#" + std::to_string(step), seed);
            next = ties[h % ties.size()];
        }
        if (*next == kEndOfText) break;
        out.push_back(*next);
    }
    return out;
}

NGramGenerator::NGramGenerator(NGramModel model, const ItemCatalog& catalog, std::uint64_t seed)
    : model_(std::move(model)), catalog_(catalog), seed_(seed) {
    if (model_.empty()) throw DataError("ngram: empty model");
}

GeneratedText NGramGenerator::generate(const SequenceSample& sample) const {
    const auto history = sample.effective_history();
    if (history.empty()) throw DataError("ngram generator: sample has no history");
    const auto idx = catalog_.find(history.back());
    if (!idx) throw DataError("ngram generator: history item " + history.back() + " is not in the catalog");
    GeneratedText out{ngram_walk(model_, tokenize(catalog_.title(*idx)), seed_), name()};
    if (out.tokens.empty()) throw DataError("ngram generator: empty generation for user " + sample.user_id);
    return out;
}

void write_generated(const std::filesystem::path& path, const std::vector<GeneratedRow>& rows) {
    std::string out = "# sample\ttext\tsource\n";
    for (const auto& r : rows) out += std::to_string(r.sample_index) + '\t' + r.text + '\t' + r.source + '\n';
    write_file(path, out);
}

std::vector<GeneratedRow> read_generated(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    std::vector<GeneratedRow> rows;
    std::size_t start = 0;
    while (start < text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string::npos) nl = text.size();
        std::string_view line(text.data() + start, nl - start);
        start = nl + 1;
        if (line.empty() || line.front() == '#') continue;
        const auto f = split_tabs(line);
        GeneratedRow r;
        if (f.size() < 2) throw DataError(path.string() + ": malformed generation line");
        auto [p, ec] = std::from_chars(f[0].data(), f[0].data() + f[0].size(), r.sample_index);
        if (ec != std::errc{} || p != f[0].data() + f[0].size()) {
            throw DataError(path.string() + ": bad sample index");
        }
        r.text = f[1];
        if (f.size() > 2) r.source = f[2];
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace groundrec
