#include "topicsteer/stemmer.hpp"

#include <algorithm>
#include <cctype>

namespace topicsteer {

namespace {

// Working state follows the classic formulation: b[0..k] is the current word,
// j marks the end of the stem left after a successful ends() match.
class PorterStemmer {
 public:
  explicit PorterStemmer(std::string word) : b_(std::move(word)), k_(static_cast<int>(b_.size()) - 1) {}

  std::string run() {
    if (k_ <= 1) return b_;
    step1ab();
    if (k_ > 0) {
      step1c();
      step2();
      step3();
      step4();
      step5();
    }
    return b_.substr(0, static_cast<std::size_t>(k_ + 1));
  }

 private:
  bool cons(int i) const {
    switch (b_[i]) {
      case 'a': case 'e': case 'i': case 'o': case 'u':
        return false;
      case 'y':
        return i == 0 ? true : !cons(i - 1);
      default:
        return true;
    }
  }

  // Number of VC sequences in b[0..j].
  int measure() const {
    int n = 0;
    int i = 0;
    while (true) {
      if (i > j_) return n;
      if (!cons(i)) break;
      ++i;
    }
    ++i;
    while (true) {
      while (true) {
        if (i > j_) return n;
        if (cons(i)) break;
        ++i;
      }
      ++i;
      ++n;
      while (true) {
        if (i > j_) return n;
        if (!cons(i)) break;
        ++i;
      }
      ++i;
    }
  }

  bool vowel_in_stem() const {
    for (int i = 0; i <= j_; ++i) {
      if (!cons(i)) return true;
    }
    return false;
  }

  bool double_consonant(int i) const {
    if (i < 1) return false;
    if (b_[i] != b_[i - 1]) return false;
    return cons(i);
  }

  // consonant-vowel-consonant ending at i, where the last consonant is not w, x or y.
  bool cvc(int i) const {
    if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
    const char ch = b_[i];
    return ch != 'w' && ch != 'x' && ch != 'y';
  }

  bool ends(std::string_view suffix) {
    const int len = static_cast<int>(suffix.size());
    if (len > k_ + 1) return false;
    if (std::string_view(b_).substr(static_cast<std::size_t>(k_ - len + 1), suffix.size()) !=
        suffix) {
      return false;
    }
    j_ = k_ - len;
    return true;
  }

  void set_to(std::string_view replacement) {
    b_.replace(static_cast<std::size_t>(j_ + 1), static_cast<std::size_t>(k_ - j_),
               replacement);
    b_.resize(static_cast<std::size_t>(j_ + 1) + replacement.size());
    k_ = j_ + static_cast<int>(replacement.size());
  }

  void replace_if_measured(std::string_view replacement) {
    if (measure() > 0) set_to(replacement);
  }

  void truncate_to_k() { b_.resize(static_cast<std::size_t>(k_ + 1)); }

  void step1ab() {
    if (b_[k_] == 's') {
      if (ends("sses")) {
        k_ -= 2;
      } else if (ends("ies")) {
        set_to("i");
      } else if (b_[k_ - 1] != 's') {
        --k_;
      }
      truncate_to_k();
    }
    if (ends("eed")) {
      if (measure() > 0) {
        --k_;
        truncate_to_k();
      }
    } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
      k_ = j_;
      truncate_to_k();
      if (ends("at")) {
        set_to("ate");
      } else if (ends("bl")) {
        set_to("ble");
      } else if (ends("iz")) {
        set_to("ize");
      } else if (double_consonant(k_)) {
        const char ch = b_[k_];
        if (ch != 'l' && ch != 's' && ch != 'z') {
          --k_;
          truncate_to_k();
        }
      } else {
        j_ = k_;
        if (measure() == 1 && cvc(k_)) {
          b_.push_back('e');
          ++k_;
        }
      }
    }
  }

  void step1c() {
    if (ends("y") && vowel_in_stem()) b_[k_] = 'i';
  }

  void step2() {
    if (k_ < 1) return;
    switch (b_[k_ - 1]) {
      case 'a':
        if (ends("ational")) { replace_if_measured("ate"); break; }
        if (ends("tional")) { replace_if_measured("tion"); break; }
        break;
      case 'c':
        if (ends("enci")) { replace_if_measured("ence"); break; }
        if (ends("anci")) { replace_if_measured("ance"); break; }
        break;
      case 'e':
        if (ends("izer")) { replace_if_measured("ize"); break; }
        break;
      case 'l':
        if (ends("abli")) { replace_if_measured("able"); break; }
        if (ends("alli")) { replace_if_measured("al"); break; }
        if (ends("entli")) { replace_if_measured("ent"); break; }
        if (ends("eli")) { replace_if_measured("e"); break; }
        if (ends("ousli")) { replace_if_measured("ous"); break; }
        break;
      case 'o':
        if (ends("ization")) { replace_if_measured("ize"); break; }
        if (ends("ation")) { replace_if_measured("ate"); break; }
        if (ends("ator")) { replace_if_measured("ate"); break; }
        break;
      case 's':
        if (ends("alism")) { replace_if_measured("al"); break; }
        if (ends("iveness")) { replace_if_measured("ive"); break; }
        if (ends("fulness")) { replace_if_measured("ful"); break; }
        if (ends("ousness")) { replace_if_measured("ous"); break; }
        break;
      case 't':
        if (ends("aliti")) { replace_if_measured("al"); break; }
        if (ends("iviti")) { replace_if_measured("ive"); break; }
        if (ends("biliti")) { replace_if_measured("ble"); break; }
        break;
      default:
        break;
    }
  }

  void step3() {
    switch (b_[k_]) {
      case 'e':
        if (ends("icate")) { replace_if_measured("ic"); break; }
        if (ends("ative")) { replace_if_measured(""); break; }
        if (ends("alize")) { replace_if_measured("al"); break; }
        break;
      case 'i':
        if (ends("iciti")) { replace_if_measured("ic"); break; }
        break;
      case 'l':
        if (ends("ical")) { replace_if_measured("ic"); break; }
        if (ends("ful")) { replace_if_measured(""); break; }
        break;
      case 's':
        if (ends("ness")) { replace_if_measured(""); break; }
        break;
      default:
        break;
    }
  }

  void step4() {
    if (k_ < 1) return;
    bool matched = false;
    switch (b_[k_ - 1]) {
      case 'a':
        matched = ends("al");
        break;
      case 'c':
        matched = ends("ance") || ends("ence");
        break;
      case 'e':
        matched = ends("er");
        break;
      case 'i':
        matched = ends("ic");
        break;
      case 'l':
        matched = ends("able") || ends("ible");
        break;
      case 'n':
        matched = ends("ant") || ends("ement") || ends("ment") || ends("ent");
        break;
      case 'o':
        if (ends("ion") && j_ >= 0 && (b_[j_] == 's' || b_[j_] == 't')) {
          matched = true;
        } else {
          matched = ends("ou");
        }
        break;
      case 's':
        matched = ends("ism");
        break;
      case 't':
        matched = ends("ate") || ends("iti");
        break;
      case 'u':
        matched = ends("ous");
        break;
      case 'v':
        matched = ends("ive");
        break;
      case 'z':
        matched = ends("ize");
        break;
      default:
        break;
    }
    if (matched && measure() > 1) {
      k_ = j_;
      truncate_to_k();
    }
  }

  void step5() {
    j_ = k_;
    if (b_[k_] == 'e') {
      const int m = measure();
      if (m > 1 || (m == 1 && !cvc(k_ - 1))) {
        --k_;
        truncate_to_k();
      }
    }
    j_ = k_;
    if (b_[k_] == 'l' && double_consonant(k_) && measure() > 1) {
      --k_;
      truncate_to_k();
    }
  }

  std::string b_;
  int k_;
  int j_ = 0;
};

}  // namespace

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string porter_stem(std::string_view word) {
  std::string lower = to_lower(word);
  const bool alphabetic = std::all_of(lower.begin(), lower.end(), [](unsigned char c) {
    return c >= 'a' && c <= 'z';
  });
  if (lower.size() <= 2 || !alphabetic) return lower;
  return PorterStemmer(std::move(lower)).run();
}

std::string stem(std::string_view word) {
  std::string current = porter_stem(word);
  // Every pass either leaves the word alone or shortens it (y -> i keeps the
  // length but cannot repeat), so this terminates quickly.
  for (std::size_t pass = 0; pass <= current.size(); ++pass) {
    std::string next = porter_stem(current);
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

}  // namespace topicsteer
