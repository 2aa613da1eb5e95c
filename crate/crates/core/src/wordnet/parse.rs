//! Reader and writer for the WordNet 3.x `index.verb` / `data.verb` formats.

use super::{Synset, SynsetId, VerbTaxonomy, WordNetError};

const INDEX: &str = "index.verb";
const DATA: &str = "data.verb";

fn parse_err(file: &'static str, line: usize, message: impl Into<String>) -> WordNetError {
    WordNetError::Parse {
        file,
        line,
        message: message.into(),
    }
}

/// License header lines start with two spaces.
fn is_header(line: &str) -> bool {
    line.starts_with("  ")
}

fn offset_field(file: &'static str, line: usize, s: &str) -> Result<u32, WordNetError> {
    if s.len() != 8 || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(parse_err(file, line, format!("bad synset offset '{}'", s)));
    }
    s.parse().map_err(|_| parse_err(file, line, format!("bad synset offset '{}'", s)))
}

fn next<'a>(
    it: &mut impl Iterator<Item = &'a str>,
    file: &'static str,
    line: usize,
    what: &str,
) -> Result<&'a str, WordNetError> {
    it.next()
        .ok_or_else(|| parse_err(file, line, format!("truncated line, expected {}", what)))
}

fn number(s: &str, radix: u32, file: &'static str, line: usize, what: &str) -> Result<usize, WordNetError> {
    usize::from_str_radix(s, radix).map_err(|_| parse_err(file, line, format!("bad {} '{}'", what, s)))
}

fn parse_data_line(line_no: usize, line: &str) -> Result<Synset, WordNetError> {
    let (fields, gloss) = match line.split_once('|') {
        Some((f, g)) => (f, g.trim()),
        None => (line, ""),
    };
    let mut it = fields.split_whitespace();
    let offset = offset_field(DATA, line_no, next(&mut it, DATA, line_no, "offset")?)?;
    let _lex_filenum = next(&mut it, DATA, line_no, "lex_filenum")?;
    let ss_type = next(&mut it, DATA, line_no, "ss_type")?;
    if ss_type != "v" {
        return Err(parse_err(DATA, line_no, format!("expected verb synset, found '{}'", ss_type)));
    }
    let w_cnt = number(next(&mut it, DATA, line_no, "w_cnt")?, 16, DATA, line_no, "w_cnt")?;
    if w_cnt == 0 {
        return Err(parse_err(DATA, line_no, "synset without words"));
    }
    let mut lemmas = Vec::with_capacity(w_cnt);
    for _ in 0..w_cnt {
        let word = next(&mut it, DATA, line_no, "word")?;
        let _lex_id = next(&mut it, DATA, line_no, "lex_id")?;
        let lemma = word.to_lowercase();
        if !lemmas.contains(&lemma) {
            lemmas.push(lemma);
        }
    }
    let p_cnt = number(next(&mut it, DATA, line_no, "p_cnt")?, 10, DATA, line_no, "p_cnt")?;
    let mut hypernyms = Vec::new();
    for _ in 0..p_cnt {
        let symbol = next(&mut it, DATA, line_no, "pointer symbol")?;
        let target = next(&mut it, DATA, line_no, "pointer offset")?;
        let pos = next(&mut it, DATA, line_no, "pointer pos")?;
        let _source_target = next(&mut it, DATA, line_no, "pointer source/target")?;
        if symbol == "@" {
            if pos != "v" {
                return Err(parse_err(DATA, line_no, format!("verb hypernym with pos '{}'", pos)));
            }
            let id = SynsetId::verb(offset_field(DATA, line_no, target)?);
            if !hypernyms.contains(&id) {
                hypernyms.push(id);
            }
        }
    }
    // Verb frames follow the pointers; they carry nothing the graph needs but
    // are checked so that malformed lines do not slip through.
    if let Some(f_cnt) = it.next() {
        let f_cnt = number(f_cnt, 10, DATA, line_no, "f_cnt")?;
        for _ in 0..f_cnt {
            let plus = next(&mut it, DATA, line_no, "frame marker")?;
            if plus != "+" {
                return Err(parse_err(DATA, line_no, format!("bad frame marker '{}'", plus)));
            }
            next(&mut it, DATA, line_no, "f_num")?;
            next(&mut it, DATA, line_no, "w_num")?;
        }
    }
    if let Some(extra) = it.next() {
        return Err(parse_err(DATA, line_no, format!("unexpected field '{}'", extra)));
    }
    Ok(Synset {
        id: SynsetId::verb(offset),
        lemmas,
        hypernyms,
        gloss: gloss.to_string(),
    })
}

fn parse_index_line(line_no: usize, line: &str) -> Result<(String, Vec<SynsetId>), WordNetError> {
    let mut it = line.split_whitespace();
    let lemma = next(&mut it, INDEX, line_no, "lemma")?.to_lowercase();
    let pos = next(&mut it, INDEX, line_no, "pos")?;
    if pos != "v" {
        return Err(parse_err(INDEX, line_no, format!("expected pos 'v', found '{}'", pos)));
    }
    let synset_cnt = number(next(&mut it, INDEX, line_no, "synset_cnt")?, 10, INDEX, line_no, "synset_cnt")?;
    let p_cnt = number(next(&mut it, INDEX, line_no, "p_cnt")?, 10, INDEX, line_no, "p_cnt")?;
    for _ in 0..p_cnt {
        next(&mut it, INDEX, line_no, "pointer symbol")?;
    }
    let _sense_cnt = next(&mut it, INDEX, line_no, "sense_cnt")?;
    let _tagsense_cnt = next(&mut it, INDEX, line_no, "tagsense_cnt")?;
    let mut ids = Vec::with_capacity(synset_cnt);
    for _ in 0..synset_cnt {
        let id = SynsetId::verb(offset_field(INDEX, line_no, next(&mut it, INDEX, line_no, "synset offset")?)?);
        if ids.contains(&id) {
            return Err(parse_err(INDEX, line_no, format!("sense {} listed twice", id)));
        }
        ids.push(id);
    }
    if let Some(extra) = it.next() {
        return Err(parse_err(INDEX, line_no, format!("unexpected field '{}'", extra)));
    }
    if ids.is_empty() {
        return Err(parse_err(INDEX, line_no, "lemma without senses"));
    }
    Ok((lemma, ids))
}

/// Parse the verb index and data files into a taxonomy.
///
/// Only `@` pointers become edges. Parse errors carry the 1-based line
/// number of the offending line.
pub fn parse_wordnet(index_text: &[u8], data_text: &[u8]) -> Result<VerbTaxonomy, WordNetError> {
    if data_text.is_empty() {
        return Err(parse_err(DATA, 0, "empty input"));
    }
    if index_text.is_empty() {
        return Err(parse_err(INDEX, 0, "empty input"));
    }
    let data = std::str::from_utf8(data_text).map_err(|e| parse_err(DATA, 0, format!("not UTF-8: {}", e)))?;
    let index =
        std::str::from_utf8(index_text).map_err(|e| parse_err(INDEX, 0, format!("not UTF-8: {}", e)))?;

    let mut synsets = Vec::new();
    for (i, line) in data.lines().enumerate() {
        if is_header(line) || line.trim().is_empty() {
            continue;
        }
        synsets.push(parse_data_line(i + 1, line)?);
    }
    let mut entries = Vec::new();
    for (i, line) in index.lines().enumerate() {
        if is_header(line) || line.trim().is_empty() {
            continue;
        }
        entries.push(parse_index_line(i + 1, line)?);
    }
    VerbTaxonomy::build(synsets, entries)
}

/// Serialize a taxonomy back into `(index.verb, data.verb)` text. Only what
/// the parser keeps is written: lemmas, hypernym pointers and glosses.
pub fn write_wordnet(tax: &VerbTaxonomy) -> (String, String) {
    let mut data = String::new();
    for s in tax.synsets() {
        data.push_str(&format!("{:08} 00 v {:02x}", s.id.offset, s.lemmas.len()));
        for l in &s.lemmas {
            data.push_str(&format!(" {} 0", l));
        }
        data.push_str(&format!(" {:03}", s.hypernyms.len()));
        for h in &s.hypernyms {
            data.push_str(&format!(" @ {:08} v 0000", h.offset));
        }
        data.push_str(" 00");
        data.push_str(&format!(" | {}\n", s.gloss));
    }
    let mut index = String::new();
    for lemma in tax.lemmas() {
        let ids = tax.synsets_of(lemma);
        index.push_str(&format!("{} v {} 0 {} 0", lemma, ids.len(), ids.len()));
        for id in ids {
            index.push_str(&format!(" {:08}", id.offset));
        }
        index.push_str("  \n");
    }
    (index, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "  1 This software and database is being provided to you, the LICENSEE, by  \n  2 Princeton University under the following license.  \n";

    #[test]
    fn data_line_fields() {
        let s = parse_data_line(
            7,
            "01926311 38 v 02 run 0 scat 0 003 @ 01835496 v 0000 + 00117985 n 0201 ~ 01928838 v 0000 02 + 02 00 + 22 00 | move fast by using one's feet",
        )
        .unwrap();
        assert_eq!(s.id, SynsetId::verb(1926311));
        assert_eq!(s.lemmas, vec!["run", "scat"]);
        assert_eq!(s.hypernyms, vec![SynsetId::verb(1835496)]);
        assert_eq!(s.gloss, "move fast by using one's feet");
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let e = parse_data_line(12, "0192631 38 v 01 run 0 000 | x").unwrap_err();
        assert!(matches!(e, WordNetError::Parse { line: 12, .. }));
        let e = parse_data_line(3, "01926311 38 v 02 run 0").unwrap_err();
        assert!(matches!(e, WordNetError::Parse { line: 3, .. }));
        let e = parse_index_line(5, "run v 2 0 2 0 01926311").unwrap_err();
        assert!(matches!(e, WordNetError::Parse { file: "index.verb", line: 5, .. }));
    }

    #[test]
    fn header_only_input_has_no_synsets() {
        let e = parse_wordnet(HEADER.as_bytes(), HEADER.as_bytes()).unwrap_err();
        assert_eq!(e, WordNetError::Integrity("no synsets".into()));
    }

    #[test]
    fn empty_input_is_a_parse_error() {
        assert!(matches!(parse_wordnet(b"", b""), Err(WordNetError::Parse { .. })));
    }

    #[test]
    fn dangling_hypernym_is_integrity_error() {
        let data = "00000010 00 v 01 run 0 001 @ 00000099 v 0000 00 | x\n";
        let index = "run v 1 1 @ 1 0 00000010  \n";
        let e = parse_wordnet(index.as_bytes(), data.as_bytes()).unwrap_err();
        assert!(matches!(e, WordNetError::Integrity(m) if m.contains("dangling")));
    }

    #[test]
    fn index_pointing_nowhere_is_integrity_error() {
        let data = "00000010 00 v 01 run 0 000 00 | x\n";
        let index = "run v 1 0 1 0 00000011  \n";
        assert!(matches!(
            parse_wordnet(index.as_bytes(), data.as_bytes()),
            Err(WordNetError::Integrity(_))
        ));
    }
}
