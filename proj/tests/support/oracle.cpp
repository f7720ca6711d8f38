#include "oracle.hpp"

#include <algorithm>
#include <set>

namespace engage::testing {

namespace {
struct Cand {
  std::string id;
  std::int64_t count;
  std::int64_t total;
};
}  // namespace

std::map<std::string, int> oracle_labels(const std::vector<CommentRecord>& records, Signal signal, int band) {
  std::set<std::string> thread_ids;
  for (const auto& r : records) thread_ids.insert(r.thread_id);

  std::vector<std::vector<Cand>> by_rank(10);
  for (const auto& tid : thread_ids) {
    std::vector<CommentRecord> top;
    for (const auto& r : records)
      if (r.thread_id == tid && !r.parent_id) top.push_back(r);
    if (top.size() < 10) continue;
    std::sort(top.begin(), top.end(), [](const CommentRecord& a, const CommentRecord& b) {
      return a.posted_at < b.posted_at || (a.posted_at == b.posted_at && a.comment_id < b.comment_id);
    });
    top.resize(10);
    std::vector<std::int64_t> counts;
    for (const auto& c : top) {
      if (signal == Signal::kUpvotes) {
        counts.push_back(c.upvotes);
      } else {
        std::int64_t n = 0;
        for (const auto& r : records)
          if (r.parent_id && *r.parent_id == c.comment_id) ++n;
        counts.push_back(n);
      }
    }
    std::int64_t total = 0;
    for (auto c : counts) total += c;
    if (signal == Signal::kReplies && total < 20) continue;
    if (total == 0) continue;
    for (int k = 0; k < 10; ++k) by_rank[static_cast<std::size_t>(k)].push_back({top[static_cast<std::size_t>(k)].comment_id, counts[static_cast<std::size_t>(k)], total});
  }

  std::map<std::string, int> labels;
  for (auto& group : by_rank) {
    std::sort(group.begin(), group.end(), [](const Cand& a, const Cand& b) {
      const __int128 lhs = static_cast<__int128>(a.count) * b.total;
      const __int128 rhs = static_cast<__int128>(b.count) * a.total;
      if (lhs != rhs) return lhs > rhs;
      return a.id < b.id;
    });
    const std::size_t m = group.size() * static_cast<std::size_t>(band) / 100;
    for (std::size_t i = 0; i < m; ++i) {
      labels[group[i].id] = 1;
      labels[group[group.size() - 1 - i].id] = 0;
    }
  }
  return labels;
}

}  // namespace engage::testing
