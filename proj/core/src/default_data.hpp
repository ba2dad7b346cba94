#pragma once

#include <string_view>

// Contents of core/data/, embedded at configure time.
namespace valfind::detail {
std::string_view default_stopwords_text();
std::string_view default_lemma_exceptions_text();
}  // namespace valfind::detail
