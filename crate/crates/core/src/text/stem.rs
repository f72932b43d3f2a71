//! Porter (1980) suffix-stripping stemmer, original rule set.

/// Stems a lowercase word. Words of two letters or fewer are returned as is.
pub fn stem(word: &str) -> String {
    let mut w: Vec<char> = word.chars().collect();
    if w.len() <= 2 {
        return word.to_string();
    }
    step1a(&mut w);
    step1b(&mut w);
    step1c(&mut w);
    step2(&mut w);
    step3(&mut w);
    step4(&mut w);
    step5a(&mut w);
    step5b(&mut w);
    w.into_iter().collect()
}

fn is_consonant(w: &[char], i: usize) -> bool {
    match w[i] {
        'a' | 'e' | 'i' | 'o' | 'u' => false,
        'y' => i == 0 || !is_consonant(w, i - 1),
        _ => true,
    }
}

/// Number of VC sequences in `[C](VC)^m[V]`.
fn measure(w: &[char]) -> usize {
    let mut m = 0;
    let mut prev_vowel = false;
    for i in 0..w.len() {
        let vowel = !is_consonant(w, i);
        if prev_vowel && !vowel {
            m += 1;
        }
        prev_vowel = vowel;
    }
    m
}

fn has_vowel(w: &[char]) -> bool {
    (0..w.len()).any(|i| !is_consonant(w, i))
}

// *d
fn ends_double_consonant(w: &[char]) -> bool {
    let n = w.len();
    n >= 2 && w[n - 1] == w[n - 2] && is_consonant(w, n - 1)
}

// *o: consonant-vowel-consonant, the last not w, x or y
fn ends_cvc(w: &[char]) -> bool {
    let n = w.len();
    n >= 3
        && is_consonant(w, n - 3)
        && !is_consonant(w, n - 2)
        && is_consonant(w, n - 1)
        && !matches!(w[n - 1], 'w' | 'x' | 'y')
}

fn ends_with(w: &[char], suffix: &str) -> bool {
    let n = suffix.chars().count();
    w.len() >= n && w[w.len() - n..].iter().copied().eq(suffix.chars())
}

fn stem_len(w: &[char], suffix: &str) -> usize {
    w.len() - suffix.chars().count()
}

fn replace_suffix(w: &mut Vec<char>, suffix: &str, with: &str) {
    let keep = stem_len(w, suffix);
    w.truncate(keep);
    w.extend(with.chars());
}

/// Applies the first rule whose suffix matches, if the stem before it has
/// measure above `min_m`. Later rules are not tried once a suffix matched.
fn apply_rules(w: &mut Vec<char>, rules: &[(&str, &str)], min_m: usize) -> bool {
    for &(suffix, with) in rules {
        if ends_with(w, suffix) {
            let stem = &w[..stem_len(w, suffix)];
            if measure(stem) > min_m {
                replace_suffix(w, suffix, with);
                return true;
            }
            return false;
        }
    }
    false
}

fn step1a(w: &mut Vec<char>) {
    if ends_with(w, "sses") {
        replace_suffix(w, "sses", "ss");
    } else if ends_with(w, "ies") {
        replace_suffix(w, "ies", "i");
    } else if ends_with(w, "ss") {
    } else if ends_with(w, "s") {
        w.pop();
    }
}

fn step1b(w: &mut Vec<char>) {
    if ends_with(w, "eed") {
        if measure(&w[..stem_len(w, "eed")]) > 0 {
            w.pop();
        }
        return;
    }
    let removed = ["ed", "ing"].iter().any(|suffix| {
        if ends_with(w, suffix) && has_vowel(&w[..stem_len(w, suffix)]) {
            w.truncate(stem_len(w, suffix));
            true
        } else {
            false
        }
    });
    if !removed {
        return;
    }
    if ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz") {
        w.push('e');
    } else if ends_double_consonant(w) && !matches!(w[w.len() - 1], 'l' | 's' | 'z') {
        w.pop();
    } else if measure(w) == 1 && ends_cvc(w) {
        w.push('e');
    }
}

fn step1c(w: &mut [char]) {
    if ends_with(w, "y") && has_vowel(&w[..w.len() - 1]) {
        let n = w.len();
        w[n - 1] = 'i';
    }
}

const STEP2: &[(&str, &str)] = &[
    ("ational", "ate"),
    ("tional", "tion"),
    ("enci", "ence"),
    ("anci", "ance"),
    ("izer", "ize"),
    ("abli", "able"),
    ("alli", "al"),
    ("entli", "ent"),
    ("eli", "e"),
    ("ousli", "ous"),
    ("ization", "ize"),
    ("ation", "ate"),
    ("ator", "ate"),
    ("alism", "al"),
    ("iveness", "ive"),
    ("fulness", "ful"),
    ("ousness", "ous"),
    ("aliti", "al"),
    ("iviti", "ive"),
    ("biliti", "ble"),
];

// Several suffixes overlap ("ational"/"tional", "ization"/"ation"), so the
// table is searched longest-suffix first.
fn step2(w: &mut Vec<char>) {
    apply_longest(w, STEP2, 0);
}

const STEP3: &[(&str, &str)] = &[
    ("icate", "ic"),
    ("ative", ""),
    ("alize", "al"),
    ("iciti", "ic"),
    ("ical", "ic"),
    ("ful", ""),
    ("ness", ""),
];

fn step3(w: &mut Vec<char>) {
    apply_longest(w, STEP3, 0);
}

const STEP4: &[&str] = &[
    "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement", "ment", "ent", "ion", "ou",
    "ism", "ate", "iti", "ous", "ive", "ize",
];

fn step4(w: &mut Vec<char>) {
    let Some(suffix) = STEP4
        .iter()
        .filter(|s| ends_with(w, s))
        .max_by_key(|s| s.len())
    else {
        return;
    };
    let stem = &w[..stem_len(w, suffix)];
    let ok =
        measure(stem) > 1 && (*suffix != "ion" || matches!(stem.last(), Some('s') | Some('t')));
    if ok {
        w.truncate(stem.len());
    }
}

fn apply_longest(w: &mut Vec<char>, rules: &[(&str, &str)], min_m: usize) {
    if let Some(rule) = rules
        .iter()
        .filter(|(s, _)| ends_with(w, s))
        .max_by_key(|(s, _)| s.len())
    {
        apply_rules(w, std::slice::from_ref(rule), min_m);
    }
}

fn step5a(w: &mut Vec<char>) {
    if ends_with(w, "e") {
        let stem = &w[..w.len() - 1];
        let m = measure(stem);
        if m > 1 || (m == 1 && !ends_cvc(stem)) {
            w.pop();
        }
    }
}

fn step5b(w: &mut Vec<char>) {
    if measure(w) > 1 && ends_double_consonant(w) && ends_with(w, "l") {
        w.pop();
    }
}
