#include "groundrec/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "groundrec/manifest.hpp"

namespace groundrec {

namespace {

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        fn(line, line_no);
    }
}

bool parse_int64(std::string_view s, std::int64_t& out) {
    if (s.empty()) return false;
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

bool skip_line(std::string_view line) { return line.empty() || line.front() == '#'; }

}  // namespace

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto tab = line.find('\t', start);
        out.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
        if (tab == std::string_view::npos) break;
        start = tab + 1;
    }
    return out;
}

InteractionLog::InteractionLog(std::vector<Interaction> records) : records_(std::move(records)) {
    std::stable_sort(records_.begin(), records_.end(),
                     [](const Interaction& a, const Interaction& b) { return a.timestamp < b.timestamp; });
}

InteractionLog InteractionLog::slice(std::size_t begin, std::size_t end) const {
    InteractionLog out;
    out.records_.assign(records_.begin() + static_cast<std::ptrdiff_t>(begin),
                        records_.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
}

InteractionLog parse_interactions_text(std::string_view text, ParseStats* stats) {
    ParseStats local;
    std::vector<Interaction> records;
    for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        if (skip_line(line)) return;
        ++local.lines;
        const auto fields = split_tabs(line);
        Interaction rec;
        if (fields.size() < 3 || fields[0].empty() || fields[1].empty() ||
            !parse_int64(fields[2], rec.timestamp)) {
            ++local.rejected;
            return;
        }
        rec.user_id = fields[0];
        rec.item_id = fields[1];
        if (rec.item_id == kPadToken) {
            throw DataError("line " + std::to_string(line_no) + ": item id collides with reserved token " +
                            kPadToken);
        }
        if (fields.size() > 3 && !fields[3].empty()) rec.domain_tag = std::string(fields[3]);
        records.push_back(std::move(rec));
    });
    if (local.rejected * 10 > local.lines) {
        throw DataError("rejected " + std::to_string(local.rejected) + " of " + std::to_string(local.lines) +
                        " interaction lines (more than 10%)");
    }
    if (stats) *stats = local;
    return InteractionLog(std::move(records));
}

InteractionLog parse_interactions(const std::filesystem::path& path, ParseStats* stats) {
    return parse_interactions_text(read_file(path), stats);
}

void write_interactions(const std::filesystem::path& path, const InteractionLog& log) {
    std::string out;
    for (const auto& r : log.records()) {
        out += r.user_id;
        out += '\t';
        out += r.item_id;
        out += '\t';
        out += std::to_string(r.timestamp);
        if (r.domain_tag) {
            out += '\t';
            out += *r.domain_tag;
        }
        out += '\n';
    }
    write_file(path, out);
}

ItemCatalog::ItemCatalog(std::vector<CatalogEntry> entries) : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(),
              [](const CatalogEntry& a, const CatalogEntry& b) { return a.item_id < b.item_id; });
    index_.reserve(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        if (e.item_id.empty()) throw DataError("catalog: empty item id");
        if (e.item_id == kPadToken) throw DataError(std::string("catalog: item id collides with ") + kPadToken);
        if (e.title.empty()) throw DataError("catalog: empty title for item " + e.item_id);
        if (!index_.emplace(e.item_id, static_cast<ItemIndex>(i)).second) {
            throw DataError("catalog: duplicate item id " + e.item_id);
        }
    }
}

std::optional<ItemIndex> ItemCatalog::find(std::string_view item_id) const {
    const auto it = index_.find(std::string(item_id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

ItemIndex ItemCatalog::index_of(std::string_view item_id) const {
    if (auto i = find(item_id)) return *i;
    throw DataError("unknown item id " + std::string(item_id));
}

std::optional<std::string> ItemCatalog::domain_tag() const {
    if (entries_.empty() || !entries_.front().domain_tag) return std::nullopt;
    const auto& tag = *entries_.front().domain_tag;
    for (const auto& e : entries_) {
        if (!e.domain_tag || *e.domain_tag != tag) return std::nullopt;
    }
    return tag;
}

ItemCatalog parse_catalog_text(std::string_view text) {
    std::vector<CatalogEntry> entries;
    for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        if (skip_line(line)) return;
        const auto fields = split_tabs(line);
        if (fields.size() < 2) {
            throw DataError("catalog line " + std::to_string(line_no) + ": expected item_id<TAB>title");
        }
        CatalogEntry e{std::string(fields[0]), std::string(fields[1]), std::nullopt};
        if (fields.size() > 2 && !fields[2].empty()) e.domain_tag = std::string(fields[2]);
        entries.push_back(std::move(e));
    });
    return ItemCatalog(std::move(entries));
}

ItemCatalog parse_catalog(const std::filesystem::path& path) { return parse_catalog_text(read_file(path)); }

Partition parse_partition(std::string_view name) {
    if (name == "train") return Partition::train;
    if (name == "valid") return Partition::valid;
    if (name == "test") return Partition::test;
    throw UsageError("unknown partition " + std::string(name));
}

std::string_view to_string(Partition p) {
    switch (p) {
        case Partition::train: return "train";
        case Partition::valid: return "valid";
        case Partition::test: return "test";
    }
    return "?";
}

Partition SplitLog::partition_of(std::size_t pos) const {
    if (pos < boundaries[7]) return Partition::train;
    if (pos < boundaries[8]) return Partition::valid;
    return Partition::test;
}

SplitLog temporal_split(const InteractionLog& log) {
    const std::size_t n = log.size();
    if (n < 10) {
        throw DataError("temporal_split needs at least 10 interactions, got " + std::to_string(n));
    }
    SplitLog out;
    const std::size_t base = n / 10;
    const std::size_t extra = n % 10;
    std::size_t offset = 0;
    for (std::size_t k = 0; k < 10; ++k) {
        out.period_sizes[k] = base + (k < extra ? 1 : 0);
        offset += out.period_sizes[k];
        if (k < 9) out.boundaries[k] = offset;
    }
    out.train = log.slice(0, out.boundaries[7]);
    out.valid = log.slice(out.boundaries[7], out.boundaries[8]);
    out.test = log.slice(out.boundaries[8], n);
    return out;
}

std::vector<std::string> SequenceSample::effective_history() const {
    std::vector<std::string> out;
    for (const auto& h : history) {
        if (h != kPadToken) out.push_back(h);
    }
    return out;
}

std::vector<SequenceSample> build_samples(const InteractionLog& log, const SplitLog& split,
                                          Partition which) {
    // User timelines as global positions, in first-appearance order.
    std::unordered_map<std::string, std::size_t> user_slot;
    std::vector<std::vector<std::size_t>> timelines;
    for (std::size_t pos = 0; pos < log.size(); ++pos) {
        const auto [it, inserted] = user_slot.emplace(log[pos].user_id, timelines.size());
        if (inserted) timelines.emplace_back();
        timelines[it->second].push_back(pos);
    }

    std::vector<std::pair<std::size_t, SequenceSample>> keyed;
    for (const auto& timeline : timelines) {
        for (std::size_t t = 1; t < timeline.size(); ++t) {
            const std::size_t pos = timeline[t];
            if (split.partition_of(pos) != which) continue;
            const Interaction& target = log[pos];
            SequenceSample s;
            s.user_id = target.user_id;
            s.target = target.item_id;
            s.target_timestamp = target.timestamp;
            const std::size_t take = std::min(t, kHistoryLength);
            const std::size_t pad = kHistoryLength - take;
            for (std::size_t k = 0; k < pad; ++k) s.history[k] = kPadToken;
            for (std::size_t k = 0; k < take; ++k) s.history[pad + k] = log[timeline[t - take + k]].item_id;
            for (std::size_t k = 0; k < t; ++k) {
                const Interaction& prev = log[timeline[k]];
                if (prev.timestamp < target.timestamp) s.known_items.insert(prev.item_id);
            }
            keyed.emplace_back(pos, std::move(s));
        }
    }
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<SequenceSample> out;
    out.reserve(keyed.size());
    for (auto& [pos, s] : keyed) out.push_back(std::move(s));
    return out;
}

namespace {
// Unbiased draw in [0, bound) that does not depend on the standard library's
// distribution implementation.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (true) {
        const std::uint64_t r = rng();
        if (r >= threshold) return r % bound;
    }
}
}  // namespace

std::vector<SequenceSample> sample_eval(const std::vector<SequenceSample>& samples, std::size_t n,
                                        std::uint64_t seed) {
    if (n < 1) throw UsageError("sample_eval: n must be >= 1");
    if (n >= samples.size()) return samples;
    std::vector<std::size_t> idx(samples.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const auto j = i + static_cast<std::size_t>(uniform_below(rng, idx.size() - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(n);
    std::sort(idx.begin(), idx.end());
    std::vector<SequenceSample> out;
    out.reserve(n);
    for (auto i : idx) out.push_back(samples[i]);
    return out;
}

std::string format_samples(const std::vector<SequenceSample>& samples) {
    std::string out = "# user\ttarget_timestamp\ttarget\thistory x10\tknown items...\n";
    for (const auto& s : samples) {
        out += s.user_id;
        out += '\t';
        out += std::to_string(s.target_timestamp);
        out += '\t';
        out += s.target;
        for (const auto& h : s.history) {
            out += '\t';
            out += h;
        }
        for (const auto& k : s.known_items) {
            out += '\t';
            out += k;
        }
        out += '\n';
    }
    return out;
}

void write_samples(const std::filesystem::path& path, const std::vector<SequenceSample>& samples) {
    write_file(path, format_samples(samples));
}

std::vector<SequenceSample> read_samples(const std::filesystem::path& path) {
    std::vector<SequenceSample> out;
    const std::string text = read_file(path);
    for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        if (skip_line(line)) return;
        const auto f = split_tabs(line);
        SequenceSample s;
        if (f.size() < 3 + kHistoryLength || !parse_int64(f[1], s.target_timestamp) || f[0].empty() ||
            f[2].empty()) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed sample line");
        }
        s.user_id = f[0];
        s.target = f[2];
        bool seen_real = false;
        for (std::size_t k = 0; k < kHistoryLength; ++k) {
            s.history[k] = f[3 + k];
            const bool pad = s.history[k] == kPadToken;
            if (pad && seen_real) {
                throw DataError(path.string() + ":" + std::to_string(line_no) + ": padding after a real item");
            }
            seen_real = seen_real || !pad;
        }
        for (std::size_t k = 3 + kHistoryLength; k < f.size(); ++k) s.known_items.emplace(f[k]);
        out.push_back(std::move(s));
    });
    return out;
}

}  // namespace groundrec
