#include "groundrec/popularity.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

#include "groundrec/eval.hpp"
#include "groundrec/manifest.hpp"

namespace groundrec {

std::uint64_t PopularityTable::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

std::vector<ItemIndex> PopularityTable::order_by_count() const {
    std::vector<ItemIndex> order(counts.size());
    std::iota(order.begin(), order.end(), ItemIndex{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](ItemIndex a, ItemIndex b) { return counts[a] > counts[b]; });
    return order;
}

PopularityTable popularity_from_counts(std::vector<std::uint64_t> counts) {
    if (counts.empty()) throw DataError("popularity: empty catalog");
    PopularityTable t;
    t.counts = std::move(counts);
    const auto n = static_cast<Eigen::Index>(t.counts.size());
    const double total = static_cast<double>(t.total());
    t.share = Eigen::VectorXd::Zero(n);
    if (total > 0) {
        for (Eigen::Index i = 0; i < n; ++i) t.share[i] = static_cast<double>(t.counts[i]) / total;
    }
    t.normalized = min_max_normalize(t.share);
    return t;
}

PopularityTable compute_popularity(const InteractionLog& train, const ItemCatalog& catalog) {
    if (catalog.empty()) throw DataError("popularity: empty catalog");
    std::vector<std::uint64_t> counts(catalog.size(), 0);
    std::size_t unknown = 0;
    for (const auto& r : train.records()) {
        if (auto i = catalog.find(r.item_id)) {
            ++counts[*i];
        } else {
            ++unknown;
        }
    }
    auto t = popularity_from_counts(std::move(counts));
    t.unknown_items = unknown;
    return t;
}

DecileReport decile_report(const PopularityTable& table) {
    DecileReport r;
    const auto order = table.order_by_count();
    const std::size_t n = order.size();
    r.small_catalog = n < 10;
    r.groups.resize(10);
    r.share.assign(10, 0.0);
    const std::size_t base = n / 10;
    const std::size_t extra = n % 10;
    const double total = static_cast<double>(table.total());
    std::size_t pos = 0;
    for (std::size_t k = 0; k < 10; ++k) {
        const std::size_t size = base + (k < extra ? 1 : 0);
        std::uint64_t bucket_count = 0;
        for (std::size_t j = 0; j < size; ++j, ++pos) {
            r.groups[k].push_back(order[pos]);
            bucket_count += table.counts[order[pos]];
        }
        r.share[k] = total > 0 ? static_cast<double>(bucket_count) / total : 0.0;
    }
    return r;
}

void write_popularity(const std::filesystem::path& path, const PopularityTable& table,
                      const ItemCatalog& catalog) {
    std::string out = "# item_id\tcount\tC\tP\n";
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        out += catalog.item_id(static_cast<ItemIndex>(i)) + '\t' + std::to_string(table.counts[i]) + '\t' +
               format_double(table.share[ii]) + '\t' + format_double(table.normalized[ii]) + '\n';
    }
    write_file(path, out);
}

PopularityTable read_popularity(const std::filesystem::path& path, const ItemCatalog& catalog) {
    const std::string text = read_file(path);
    std::vector<std::uint64_t> counts(catalog.size(), 0);
    std::vector<char> seen(catalog.size(), 0);
    std::size_t start = 0;
    while (start < text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string::npos) nl = text.size();
        std::string_view line(text.data() + start, nl - start);
        start = nl + 1;
        if (line.empty() || line.front() == '#') continue;
        const auto f = split_tabs(line);
        if (f.size() < 2) throw DataError(path.string() + ": malformed popularity line");
        const ItemIndex i = catalog.index_of(f[0]);
        std::uint64_t c = 0;
        auto [p, ec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), c);
        if (ec != std::errc{} || p != f[1].data() + f[1].size()) {
            throw DataError(path.string() + ": bad count for " + std::string(f[0]));
        }
        counts[i] = c;
        seen[i] = 1;
    }
    for (std::size_t i = 0; i < seen.size(); ++i) {
        if (!seen[i]) throw DataError(path.string() + ": missing item " + catalog.item_id(static_cast<ItemIndex>(i)));
    }
    return popularity_from_counts(std::move(counts));
}

void write_deciles(const std::filesystem::path& path, const DecileReport& report,
                   const PopularityTable& table) {
    std::string out = "# bucket\titems\tinteractions\tshare\n";
    if (report.small_catalog) out += "# small-catalog: fewer than 10 items, some buckets are empty\n";
    for (std::size_t k = 0; k < report.groups.size(); ++k) {
        std::uint64_t c = 0;
        for (auto i : report.groups[k]) c += table.counts[i];
        out += std::to_string(k) + '\t' + std::to_string(report.groups[k].size()) + '\t' + std::to_string(c) +
               '\t' + format_double(report.share[k]) + '\n';
    }
    write_file(path, out);
}

}  // namespace groundrec
