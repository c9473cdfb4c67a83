use serde::{Deserialize, Serialize};

/// Hashtags, URLs and mentions found in a tweet text, each deduplicated in
/// order of first appearance, original case preserved.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entities {
    pub hashtags: Vec<String>,
    pub urls: Vec<String>,
    pub mentions: Vec<String>,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn push_unique(list: &mut Vec<String>, item: &str) {
    if !list.iter().any(|s| s == item) {
        list.push(item.to_string());
    }
}

/// Single left-to-right scan.
///
/// * URL: maximal non-whitespace run starting with `http://` or `https://`
///   and continuing past the scheme.
///   Text inside a URL is not scanned for tags.
/// * Hashtag / mention: `#` or `@` not preceded by a word character,
///   followed by a maximal run of word characters.
pub fn extract_entities(text: &str) -> Entities {
    let mut out = Entities::default();
    let mut prev: Option<char> = None;
    let mut i = 0;
    while i < text.len() {
        let rest = &text[i..];
        let c = rest.chars().next().expect("nonempty");
        let at_boundary = prev.is_none_or(|p| !is_word_char(p));

        let scheme = ["http://", "https://"].into_iter().find(|s| rest.starts_with(s)).map_or(0, str::len);
        let len = rest.find(char::is_whitespace).unwrap_or(rest.len());
        if at_boundary && scheme > 0 && len > scheme {
            push_unique(&mut out.urls, &rest[..len]);
            prev = rest[..len].chars().last();
            i += len;
            continue;
        }
        if at_boundary && (c == '#' || c == '@') {
            let body = &rest[1..];
            let len = body.find(|ch: char| !is_word_char(ch)).unwrap_or(body.len());
            if len > 0 {
                let tag = &rest[..1 + len];
                let list = if c == '#' { &mut out.hashtags } else { &mut out.mentions };
                push_unique(list, tag);
                prev = tag.chars().last();
                i += 1 + len;
                continue;
            }
        }
        prev = Some(c);
        i += c.len_utf8();
    }
    out
}
