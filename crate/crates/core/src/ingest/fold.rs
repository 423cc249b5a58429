use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// Lowercase and strip diacritics ("Trèves" → "treves", "Straße" → "strasse").
pub fn fold(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.nfd() {
        if is_combining_mark(c) {
            continue;
        }
        for lc in c.to_lowercase() {
            match lc {
                'ß' => out.push_str("ss"),
                'æ' => out.push_str("ae"),
                'œ' => out.push_str("oe"),
                'ø' => out.push('o'),
                'ł' => out.push('l'),
                'đ' => out.push('d'),
                _ => out.push(lc),
            }
        }
    }
    out
}

/// Normalized form used for gazetteer lookups: folded, punctuation other than
/// commas replaced by blanks, each comma-separated token whitespace-collapsed,
/// empty tokens dropped, tokens re-joined with ", ".
pub fn normalize_place(raw: &str) -> String {
    let folded: String = fold(raw)
        .chars()
        .map(|c| {
            if c == ',' || c.is_alphanumeric() {
                c
            } else {
                ' '
            }
        })
        .collect();
    folded
        .split(',')
        .map(|t| t.split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|t| !t.is_empty())
        .collect::<Vec<_>>()
        .join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_diacritics_and_case() {
        assert_eq!(fold("Trèves"), "treves");
        assert_eq!(fold("STRAßE"), "strasse");
        assert_eq!(fold("Liège"), "liege");
    }

    #[test]
    fn place_normalization() {
        assert_eq!(
            normalize_place("  Metz ,  Lorraine,FRANCE!! "),
            "metz, lorraine, france"
        );
        assert_eq!(
            normalize_place("Rhineland-Palatinate"),
            "rhineland palatinate"
        );
        assert_eq!(normalize_place(",,"), "");
        assert_eq!(normalize_place("Atlantis-99"), "atlantis 99");
    }
}
