#pragma once

#include <string>
#include <string_view>

namespace topicsteer {

/// Porter (1980) suffix-stripping stemmer, operating on lowercase ASCII.
///
/// Input is lowercased first. Words of length <= 2 and words containing
/// non-letters are returned lowercased but otherwise untouched.
std::string porter_stem(std::string_view word);

/// Porter passes repeated until the word stops changing, so that stemming a
/// stem is a no-op (one pass maps "accidental" to "accident", a second pass
/// maps that to "accid"). Used for variant expansion, lemma scoring and
/// ROUGE-L.
std::string stem(std::string_view word);

std::string to_lower(std::string_view text);

}  // namespace topicsteer
