use super::Token;

/// Full-line match of a token slice against `text`.
///
/// The slice need not be a whole template; the specialization check matches
/// sub-slices, which may start or end with either token kind or be empty. An
/// empty slice matches only the empty string.
///
/// Literal prefix and suffix are pinned first; the remaining body has the
/// shape `W (L W)*` and is matched left to right, taking the leftmost
/// occurrence of each literal after at least one character. Leftmost choice is
/// optimal for patterns whose only repetition is the unbounded wildcard.
pub(crate) fn match_tokens(tokens: &[Token], text: &str) -> bool {
    let (mut body, mut rest) = (text, tokens);

    if let Some((Token::Literal(head), tail)) = rest.split_first() {
        match body.strip_prefix(head.as_str()) {
            Some(b) => body = b,
            None => return false,
        }
        rest = tail;
    }
    if rest.is_empty() {
        return body.is_empty();
    }
    if let Some((Token::Literal(last), init)) = rest.split_last() {
        match body.strip_suffix(last.as_str()) {
            Some(b) => body = b,
            None => return false,
        }
        rest = init;
    }

    // `rest` is now W (L W)*.
    let mut pos = 0usize;
    for tok in rest {
        match tok {
            Token::Wildcard => {
                // consume one character; the search below takes care of the rest
                match body[pos..].chars().next() {
                    Some(c) => pos += c.len_utf8(),
                    None => return false,
                }
            }
            Token::Literal(lit) => match body[pos..].find(lit.as_str()) {
                Some(off) => pos += off + lit.len(),
                None => return false,
            },
        }
    }
    // A trailing wildcard already consumed its mandatory character; it absorbs
    // whatever is left.
    true
}
