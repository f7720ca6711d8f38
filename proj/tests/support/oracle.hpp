#pragma once

#include <map>
#include <string>
#include <vector>

#include "engage/corpus.hpp"
#include "engage/dataset.hpp"

namespace engage::testing {

// Brute-force top/flop labelling straight from the records: full sorts,
// replies counted by scanning every record, shares compared as exact
// fractions. Returns comment_id -> 1 (top) / 0 (flop).
std::map<std::string, int> oracle_labels(const std::vector<CommentRecord>& records, Signal signal, int band);

}  // namespace engage::testing
