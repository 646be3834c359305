#include "kgr/stemming.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

namespace kgr {
namespace {

// Porter stemmer state over a word buffer b[0..k]. Mirrors the reference
// ANSI C implementation, including its departures from the 1980 paper
// (length <= 2 shortcut, bli->ble, logi->log).
struct Porter {
    std::string b;
    int k = 0;  // offset to the last character
    int j = 0;  // suffix boundary set by ends()

    bool cons(int i) const {
        switch (b[i]) {
            case 'a': case 'e': case 'i': case 'o': case 'u':
                return false;
            case 'y':
                return (i == 0) ? true : !cons(i - 1);
            default:
                return true;
        }
    }

    // Number of consonant-vowel sequences in b[0..j].
    int m() const {
        int n = 0;
        int i = 0;
        while (true) {
            if (i > j) return n;
            if (!cons(i)) break;
            i++;
        }
        i++;
        while (true) {
            while (true) {
                if (i > j) return n;
                if (cons(i)) break;
                i++;
            }
            i++;
            n++;
            while (true) {
                if (i > j) return n;
                if (!cons(i)) break;
                i++;
            }
            i++;
        }
    }

    bool vowel_in_stem() const {
        for (int i = 0; i <= j; i++)
            if (!cons(i)) return true;
        return false;
    }

    bool doublec(int i) const {
        if (i < 1) return false;
        if (b[i] != b[i - 1]) return false;
        return cons(i);
    }

    // consonant-vowel-consonant ending at i, where the final consonant
    // is not w, x or y.
    bool cvc(int i) const {
        if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
        char ch = b[i];
        return ch != 'w' && ch != 'x' && ch != 'y';
    }

    bool ends(std::string_view s) {
        int len = static_cast<int>(s.size());
        if (len > k + 1) return false;
        if (b.compare(k - len + 1, len, s) != 0) return false;
        j = k - len;
        return true;
    }

    void setto(std::string_view s) {
        b.replace(j + 1, b.size() - j - 1, s);
        k = j + static_cast<int>(s.size());
        b.resize(k + 1);
    }

    void r(std::string_view s) {
        if (m() > 0) setto(s);
    }

    // Plurals and -ed / -ing.
    void step1ab() {
        if (b[k] == 's') {
            if (ends("sses")) k -= 2;
            else if (ends("ies")) setto("i");
            else if (b[k - 1] != 's') k--;
        }
        if (ends("eed")) {
            if (m() > 0) k--;
        } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
            k = j;
            b.resize(k + 1);
            if (ends("at")) setto("ate");
            else if (ends("bl")) setto("ble");
            else if (ends("iz")) setto("ize");
            else if (doublec(k)) {
                k--;
                char ch = b[k];
                if (ch == 'l' || ch == 's' || ch == 'z') k++;
                b.resize(k + 1);
            } else if (m() == 1 && cvc(k)) {
                setto("e");
            }
        }
        b.resize(k + 1);
    }

    void step1c() {
        if (ends("y") && vowel_in_stem()) b[k] = 'i';
    }

    void step2() {
        if (k < 1) return;
        switch (b[k - 1]) {
            case 'a':
                if (ends("ational")) { r("ate"); break; }
                if (ends("tional")) { r("tion"); break; }
                break;
            case 'c':
                if (ends("enci")) { r("ence"); break; }
                if (ends("anci")) { r("ance"); break; }
                break;
            case 'e':
                if (ends("izer")) { r("ize"); break; }
                break;
            case 'l':
                if (ends("bli")) { r("ble"); break; }
                if (ends("alli")) { r("al"); break; }
                if (ends("entli")) { r("ent"); break; }
                if (ends("eli")) { r("e"); break; }
                if (ends("ousli")) { r("ous"); break; }
                break;
            case 'o':
                if (ends("ization")) { r("ize"); break; }
                if (ends("ation")) { r("ate"); break; }
                if (ends("ator")) { r("ate"); break; }
                break;
            case 's':
                if (ends("alism")) { r("al"); break; }
                if (ends("iveness")) { r("ive"); break; }
                if (ends("fulness")) { r("ful"); break; }
                if (ends("ousness")) { r("ous"); break; }
                break;
            case 't':
                if (ends("aliti")) { r("al"); break; }
                if (ends("iviti")) { r("ive"); break; }
                if (ends("biliti")) { r("ble"); break; }
                break;
            case 'g':
                if (ends("logi")) { r("log"); break; }
                break;
        }
    }

    void step3() {
        switch (b[k]) {
            case 'e':
                if (ends("icate")) { r("ic"); break; }
                if (ends("ative")) { r(""); break; }
                if (ends("alize")) { r("al"); break; }
                break;
            case 'i':
                if (ends("iciti")) { r("ic"); break; }
                break;
            case 'l':
                if (ends("ical")) { r("ic"); break; }
                if (ends("ful")) { r(""); break; }
                break;
            case 's':
                if (ends("ness")) { r(""); break; }
                break;
        }
    }

    void step4() {
        if (k < 1) return;
        switch (b[k - 1]) {
            case 'a':
                if (ends("al")) break;
                return;
            case 'c':
                if (ends("ance")) break;
                if (ends("ence")) break;
                return;
            case 'e':
                if (ends("er")) break;
                return;
            case 'i':
                if (ends("ic")) break;
                return;
            case 'l':
                if (ends("able")) break;
                if (ends("ible")) break;
                return;
            case 'n':
                if (ends("ant")) break;
                if (ends("ement")) break;
                if (ends("ment")) break;
                if (ends("ent")) break;
                return;
            case 'o':
                if (ends("ion") && j >= 0 && (b[j] == 's' || b[j] == 't')) break;
                if (ends("ou")) break;
                return;
            case 's':
                if (ends("ism")) break;
                return;
            case 't':
                if (ends("ate")) break;
                if (ends("iti")) break;
                return;
            case 'u':
                if (ends("ous")) break;
                return;
            case 'v':
                if (ends("ive")) break;
                return;
            case 'z':
                if (ends("ize")) break;
                return;
            default:
                return;
        }
        if (m() > 1) {
            k = j;
            b.resize(k + 1);
        }
    }

    void step5() {
        j = k;
        if (b[k] == 'e') {
            int a = m();
            if (a > 1 || (a == 1 && !cvc(k - 1))) {
                k--;
                b.resize(k + 1);
            }
        }
        if (b[k] == 'l' && doublec(k) && m() > 1) {
            k--;
            b.resize(k + 1);
        }
    }

    std::string stem(std::string_view word) {
        b.assign(word);
        k = static_cast<int>(b.size()) - 1;
        if (k <= 1) return b;
        step1ab();
        step1c();
        step2();
        step3();
        step4();
        step5();
        return b;
    }
};

bool is_digit_tok(char c) { return c >= '0' && c <= '9'; }
bool is_alpha_tok(char c) { return c >= 'a' && c <= 'z'; }

}  // namespace

std::string porter_stem(std::string_view word) {
    if (word.empty()) return std::string(word);
    for (char c : word)
        if (!is_alpha_tok(c)) return std::string(word);
    Porter p;
    return p.stem(word);
}

std::vector<std::string> normalize_text(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    bool cur_digit = false;
    auto flush = [&] {
        if (!cur.empty()) {
            tokens.push_back(cur);
            cur.clear();
        }
    };
    for (char raw : text) {
        char c = static_cast<char>(std::tolower(static_cast<unsigned char>(raw)));
        if (is_alpha_tok(c) || is_digit_tok(c)) {
            bool d = is_digit_tok(c);
            if (!cur.empty() && d != cur_digit) flush();
            cur_digit = d;
            cur.push_back(c);
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

std::vector<std::string> stems_of(std::string_view text, const StopWordPolicy& policy) {
    std::vector<std::string> out;
    for (const auto& tok : normalize_text(text)) {
        if (policy.is_stopped(tok)) continue;
        out.push_back(porter_stem(tok));
    }
    return out;
}

StopWordPolicy StopWordPolicy::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open stop-word file: " + path);
    StopWordPolicy policy;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (line[0] == '+') {
            policy.keep_set.insert(line.substr(1));
        } else {
            policy.stop_set.insert(line);
        }
    }
    return policy;
}

void StopWordPolicy::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write stop-word file: " + path);
    std::vector<std::string> stops(stop_set.begin(), stop_set.end());
    std::sort(stops.begin(), stops.end());
    for (const auto& w : stops) out << w << '\n';
    std::vector<std::string> keeps(keep_set.begin(), keep_set.end());
    std::sort(keeps.begin(), keeps.end());
    for (const auto& w : keeps) out << '+' << w << '\n';
}

VqaCorpus VqaCorpus::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus file: " + path);
    VqaCorpus corpus;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::runtime_error("corpus line " + std::to_string(lineno) + ": missing tab");
        corpus.counts[line.substr(0, tab)] += std::stoull(line.substr(tab + 1));
    }
    return corpus;
}

void VqaCorpus::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write corpus file: " + path);
    std::vector<std::pair<std::string, std::size_t>> rows(counts.begin(), counts.end());
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    for (const auto& [stem, freq] : rows) out << stem << '\t' << freq << '\n';
}

}  // namespace kgr
