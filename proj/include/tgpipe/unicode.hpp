#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tgpipe {

// Decodes the code point starting at byte i; advances i past it.
// Invalid sequences yield U+FFFD and advance one byte, so scanning
// arbitrary bytes always terminates.
inline char32_t decode_utf8(std::string_view s, size_t& i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    auto cont = [&](size_t k) {
        return i + k < s.size() &&
               (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
    };
    if (b0 < 0x80) { i += 1; return b0; }
    if ((b0 & 0xE0) == 0xC0 && cont(1)) {
        char32_t cp = ((b0 & 0x1F) << 6) |
                      (static_cast<unsigned char>(s[i + 1]) & 0x3F);
        i += 2;
        return cp >= 0x80 ? cp : 0xFFFD;
    }
    if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
        char32_t cp = ((b0 & 0x0F) << 12) |
                      ((static_cast<unsigned char>(s[i + 1]) & 0x3F) << 6) |
                      (static_cast<unsigned char>(s[i + 2]) & 0x3F);
        i += 3;
        return cp >= 0x800 ? cp : 0xFFFD;
    }
    if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
        char32_t cp = ((b0 & 0x07) << 18) |
                      ((static_cast<unsigned char>(s[i + 1]) & 0x3F) << 12) |
                      ((static_cast<unsigned char>(s[i + 2]) & 0x3F) << 6) |
                      (static_cast<unsigned char>(s[i + 3]) & 0x3F);
        i += 4;
        return (cp >= 0x10000 && cp <= 0x10FFFF) ? cp : 0xFFFD;
    }
    i += 1;
    return 0xFFFD;
}

inline void encode_utf8(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

inline std::vector<char32_t> to_codepoints(std::string_view s) {
    std::vector<char32_t> cps;
    cps.reserve(s.size());
    for (size_t i = 0; i < s.size();) cps.push_back(decode_utf8(s, i));
    return cps;
}

inline std::string from_codepoints(const std::vector<char32_t>& cps) {
    std::string out;
    for (char32_t cp : cps) encode_utf8(cp, out);
    return out;
}

// ASCII plus Latin-1/Latin Extended-A simple case folding; enough for the
// European-language corpora this pipeline targets.
inline char32_t fold_lower(char32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 32;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;  // À-Þ
    if (cp >= 0x100 && cp <= 0x17F && (cp & 1) == 0) return cp + 1;
    if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 32;  // Greek
    if (cp >= 0x410 && cp <= 0x42F) return cp + 32;                 // Cyrillic
    if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
    return cp;
}

inline std::string lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (size_t i = 0; i < s.size();) encode_utf8(fold_lower(decode_utf8(s, i)), out);
    return out;
}

inline bool is_letter(char32_t cp) {
    if ((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z')) return true;
    if (cp >= 0xC0 && cp <= 0x24F && cp != 0xD7 && cp != 0xF7) return true;  // Latin ext
    if (cp >= 0x370 && cp <= 0x3FF) return true;    // Greek
    if (cp >= 0x400 && cp <= 0x4FF) return true;    // Cyrillic
    if (cp >= 0x530 && cp <= 0x58F) return true;    // Armenian
    if (cp >= 0x590 && cp <= 0x7BF) return true;    // Hebrew/Arabic
    if (cp >= 0x900 && cp <= 0xDFF) return true;    // Indic
    if (cp >= 0x4E00 && cp <= 0x9FFF) return true;  // CJK
    if (cp >= 0x3040 && cp <= 0x30FF) return true;  // Kana
    if (cp >= 0xAC00 && cp <= 0xD7AF) return true;  // Hangul
    return false;
}

inline bool is_digit_cp(char32_t cp) { return cp >= '0' && cp <= '9'; }

inline bool is_word_cp(char32_t cp) {
    return is_letter(cp) || is_digit_cp(cp) || cp == '_';
}

inline bool is_upper(char32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return true;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return true;
    if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return true;
    if (cp >= 0x400 && cp <= 0x42F) return true;
    return false;
}

// Unicode word segmentation, simplified: maximal runs of word code points.
// Tokens come back lowercased.
inline std::vector<std::string> word_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (size_t i = 0; i < text.size();) {
        char32_t cp = decode_utf8(text, i);
        if (is_word_cp(cp)) {
            encode_utf8(fold_lower(cp), cur);
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

// Emoji-property ranges (pictographs, symbols, flags); the subset that
// covers reactions and message decorations seen on messaging platforms.
inline bool is_emoji_base(char32_t cp) {
    return (cp >= 0x1F300 && cp <= 0x1F5FF) ||  // symbols & pictographs
           (cp >= 0x1F600 && cp <= 0x1F64F) ||  // emoticons
           (cp >= 0x1F680 && cp <= 0x1F6FF) ||  // transport
           (cp >= 0x1F900 && cp <= 0x1F9FF) ||  // supplemental
           (cp >= 0x1FA70 && cp <= 0x1FAFF) ||  // extended-A
           (cp >= 0x2600 && cp <= 0x26FF) ||    // misc symbols
           (cp >= 0x2700 && cp <= 0x27BF) ||    // dingbats
           cp == 0x2B50 || cp == 0x2B55 ||
           cp == 0x203C || cp == 0x2049 ||
           (cp >= 0x1F1E6 && cp <= 0x1F1FF);    // regional indicators
}

inline bool is_emoji_modifier(char32_t cp) {
    return cp == 0xFE0F ||                       // variation selector
           (cp >= 0x1F3FB && cp <= 0x1F3FF);     // skin tones
}

constexpr char32_t kZwj = 0x200D;

}  // namespace tgpipe
