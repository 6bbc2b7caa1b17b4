//! Seeded generator of simple English-like prose.
//!
//! The experiments need a training corpus of a megabyte or more. Rather than
//! ship one, sentences are drawn from a small phrase grammar whose word
//! choices follow a Zipf-like law (weight `1 / (rank + 1)`), which gives the
//! n-gram model skewed, context-dependent distributions similar in shape to
//! natural text.

use rand::distributions::{Distribution as _, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SUBJECTS: &[&str] = &[
    "i",
    "you",
    "we",
    "they",
    "he",
    "she",
    "people",
    "nobody",
    "everyone",
    "the police",
];
const OBJECT_PRONOUNS: &[&str] = &[
    "it",
    "me",
    "you",
    "him",
    "her",
    "them",
    "us",
    "this",
    "that",
    "something",
];
const DETERMINERS: &[&str] = &[
    "the", "a", "my", "your", "this", "that", "his", "her", "our", "their", "no", "one", "every",
    "some", "another",
];
const ADJECTIVES: &[&str] = &[
    "little", "good", "old", "same", "new", "long", "great", "small", "big", "last", "other",
    "young", "whole", "real", "best", "crazy", "strange", "quiet", "dark", "cold", "safe", "right",
    "wrong", "happy", "hard", "easy", "early", "late", "simple", "true", "empty", "bright",
    "heavy", "soft", "warm", "tired", "sudden", "perfect", "lucky", "careful", "angry", "honest",
    "broken", "secret", "open", "final", "strong", "free", "clear", "short",
];
const NOUNS: &[&str] = &[
    "way", "thing", "time", "day", "man", "woman", "house", "door", "night", "world", "life",
    "hand", "room", "car", "place", "friend", "job", "reason", "money", "family", "name", "mother",
    "father", "city", "story", "book", "letter", "road", "window", "table", "water", "head",
    "eyes", "face", "voice", "word", "morning", "school", "girl", "boy", "child", "problem",
    "question", "answer", "idea", "plan", "moment", "light", "phone", "game", "dog", "horse",
    "town", "river", "street", "kitchen", "office", "garden", "party", "war", "truth", "heart",
    "doctor", "teacher", "brother", "sister", "living", "dinner", "picture", "song", "train",
    "ship", "sea", "field", "gun", "key", "bag", "box", "bed", "wall", "floor", "fire", "rain",
    "snow", "summer", "winter", "week", "year", "hour", "minute", "chance", "choice", "mistake",
    "promise", "secret", "dream", "memory", "rule",
];
const TRANSITIVE: &[(&str, &str)] = &[
    ("do", "did"),
    ("know", "knew"),
    ("have", "had"),
    ("see", "saw"),
    ("take", "took"),
    ("get", "got"),
    ("make", "made"),
    ("find", "found"),
    ("want", "wanted"),
    ("keep", "kept"),
    ("need", "needed"),
    ("like", "liked"),
    ("love", "loved"),
    ("leave", "left"),
    ("tell", "told"),
    ("give", "gave"),
    ("call", "called"),
    ("hear", "heard"),
    ("bring", "brought"),
    ("hold", "held"),
    ("open", "opened"),
    ("close", "closed"),
    ("read", "read"),
    ("write", "wrote"),
    ("remember", "remembered"),
    ("forget", "forgot"),
    ("watch", "watched"),
    ("follow", "followed"),
    ("miss", "missed"),
    ("help", "helped"),
    ("carry", "carried"),
    ("buy", "bought"),
    ("sell", "sold"),
    ("try", "tried"),
    ("change", "changed"),
    ("understand", "understood"),
    ("lose", "lost"),
    ("meet", "met"),
    ("protect", "protected"),
    ("show", "showed"),
    ("save", "saved"),
    ("answer", "answered"),
    ("fix", "fixed"),
    ("finish", "finished"),
    ("start", "started"),
    ("pay", "paid"),
    ("trust", "trusted"),
];
const INTRANSITIVE: &[(&str, &str)] = &[
    ("go", "went"),
    ("come", "came"),
    ("stay", "stayed"),
    ("wait", "waited"),
    ("run", "ran"),
    ("sleep", "slept"),
    ("work", "worked"),
    ("smile", "smiled"),
    ("leave", "left"),
    ("laugh", "laughed"),
    ("fall", "fell"),
    ("stop", "stopped"),
    ("listen", "listened"),
    ("move", "moved"),
    ("live", "lived"),
    ("try", "tried"),
    ("cry", "cried"),
    ("sit", "sat"),
    ("stand", "stood"),
    ("return", "returned"),
];
const AUXILIARIES: &[&str] = &[
    "will",
    "can",
    "would",
    "could",
    "should",
    "must",
    "might",
    "do",
    "did",
    "have to",
    "want to",
    "was going to",
    "need to",
    "used to",
    "don ' t",
    "can ' t",
    "won ' t",
];
const ADVERBS: &[&str] = &[
    "really", "always", "never", "just", "still", "now", "here", "there", "too", "again", "often",
    "soon", "later", "already", "today", "tonight", "together", "alone", "away", "back", "once",
    "maybe", "finally", "quickly",
];
const PREPOSITIONS: &[&str] = &[
    "to", "for", "with", "without", "in", "on", "at", "from", "about", "into", "after", "before",
    "over", "under", "near", "behind", "through",
];
const CONJUNCTIONS: &[&str] = &[
    "and", "but", "because", "so", "when", "if", "while", "until", "since", "or",
];
const WH: &[&str] = &["what", "how", "why", "where", "when", "who"];
const COMMUNICATION: &[&str] = &[
    "said",
    "asked",
    "thought",
    "knew",
    "told me",
    "wondered",
    "whispered",
    "believed",
];
const NAMES: &[&str] = &[
    "john", "mary", "sam", "anna", "david", "emma", "jack", "lucy", "peter", "sarah",
];

/// One word class with Zipf-like sampling weights.
struct Class<T: 'static> {
    items: &'static [T],
    weights: WeightedIndex<f64>,
}

impl<T: Copy> Class<T> {
    fn new(items: &'static [T]) -> Self {
        let weights = WeightedIndex::new((0..items.len()).map(|r| 1.0 / (r as f64 + 1.0)))
            .expect("non-empty class");
        Class { items, weights }
    }

    fn pick(&self, rng: &mut ChaCha8Rng) -> T {
        self.items[self.weights.sample(rng)]
    }
}

struct Grammar {
    subj: Class<&'static str>,
    obj: Class<&'static str>,
    det: Class<&'static str>,
    adj: Class<&'static str>,
    noun: Class<&'static str>,
    tv: Class<(&'static str, &'static str)>,
    iv: Class<(&'static str, &'static str)>,
    aux: Class<&'static str>,
    adv: Class<&'static str>,
    prep: Class<&'static str>,
    conj: Class<&'static str>,
    wh: Class<&'static str>,
    say: Class<&'static str>,
    name: Class<&'static str>,
}

impl Grammar {
    fn new() -> Self {
        Grammar {
            subj: Class::new(SUBJECTS),
            obj: Class::new(OBJECT_PRONOUNS),
            det: Class::new(DETERMINERS),
            adj: Class::new(ADJECTIVES),
            noun: Class::new(NOUNS),
            tv: Class::new(TRANSITIVE),
            iv: Class::new(INTRANSITIVE),
            aux: Class::new(AUXILIARIES),
            adv: Class::new(ADVERBS),
            prep: Class::new(PREPOSITIONS),
            conj: Class::new(CONJUNCTIONS),
            wh: Class::new(WH),
            say: Class::new(COMMUNICATION),
            name: Class::new(NAMES),
        }
    }

    fn noun_phrase(&self, rng: &mut ChaCha8Rng, out: &mut Vec<&'static str>) {
        match rng.gen_range(0..10) {
            0..=2 => out.push(self.obj.pick(rng)),
            3 => out.push(self.name.pick(rng)),
            4..=6 => {
                out.push(self.det.pick(rng));
                out.push(self.noun.pick(rng));
            }
            _ => {
                out.push(self.det.pick(rng));
                out.push(self.adj.pick(rng));
                out.push(self.noun.pick(rng));
            }
        }
    }

    fn subject(&self, rng: &mut ChaCha8Rng, out: &mut Vec<&'static str>) {
        if rng.gen_bool(0.75) {
            out.push(self.subj.pick(rng));
        } else if rng.gen_bool(0.5) {
            out.push(self.name.pick(rng));
        } else {
            out.push(self.det.pick(rng));
            out.push(self.noun.pick(rng));
        }
    }

    fn verb_phrase(&self, rng: &mut ChaCha8Rng, out: &mut Vec<&'static str>) {
        if rng.gen_bool(0.3) {
            out.push(self.adv.pick(rng));
        }
        let modal = rng.gen_bool(0.45);
        if modal {
            out.push(self.aux.pick(rng));
        }
        let transitive = rng.gen_bool(0.7);
        let (base, past) = if transitive {
            self.tv.pick(rng)
        } else {
            self.iv.pick(rng)
        };
        out.push(if modal || rng.gen_bool(0.4) {
            base
        } else {
            past
        });
        if transitive {
            self.noun_phrase(rng, out);
        }
        if rng.gen_bool(0.45) {
            out.push(self.prep.pick(rng));
            self.noun_phrase(rng, out);
        }
        if rng.gen_bool(0.2) {
            out.push(self.adv.pick(rng));
        }
    }

    fn clause(&self, rng: &mut ChaCha8Rng, out: &mut Vec<&'static str>) {
        self.subject(rng, out);
        self.verb_phrase(rng, out);
    }

    fn sentence(&self, rng: &mut ChaCha8Rng, out: &mut Vec<&'static str>) {
        match rng.gen_range(0..12) {
            0..=4 => {
                self.clause(rng, out);
                out.push(".");
            }
            5 | 6 => {
                self.clause(rng, out);
                out.push(if rng.gen_bool(0.6) { "," } else { "" });
                out.push(self.conj.pick(rng));
                self.clause(rng, out);
                out.push(".");
            }
            7 => {
                self.subject(rng, out);
                out.push(self.say.pick(rng));
                out.push(self.wh.pick(rng));
                self.clause(rng, out);
                out.push(".");
            }
            8 => {
                out.push(self.wh.pick(rng));
                out.push(if rng.gen_bool(0.5) { "do" } else { "did" });
                self.subject(rng, out);
                out.push(self.tv.pick(rng).0);
                out.push("?");
            }
            9 => {
                out.push("\"");
                self.clause(rng, out);
                out.push(if rng.gen_bool(0.7) { "," } else { "!" });
                out.push("\"");
                self.subject(rng, out);
                out.push(self.say.pick(rng));
                out.push(".");
            }
            10 => {
                self.subject(rng, out);
                out.push(if rng.gen_bool(0.5) { "was" } else { "is" });
                if rng.gen_bool(0.3) {
                    out.push("not");
                }
                out.push(self.adj.pick(rng));
                out.push(".");
            }
            _ => {
                out.push(self.subj.pick(rng));
                out.push("do");
                out.push("not");
                out.push(self.tv.pick(rng).0);
                out.push(self.obj.pick(rng));
                out.push(self.adv.pick(rng));
                out.push(".");
            }
        }
    }
}

/// Generates paragraphs of 4 to 10 sentences until their total size reaches
/// `min_bytes`. Each paragraph is one corpus record.
pub fn synthetic_corpus(seed: u64, min_bytes: usize) -> Vec<String> {
    let grammar = Grammar::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::new();
    let mut size = 0;
    let mut words = Vec::new();
    while size < min_bytes {
        words.clear();
        for _ in 0..rng.gen_range(4..=10) {
            grammar.sentence(&mut rng, &mut words);
        }
        let mut line = String::new();
        for w in words.iter().filter(|w| !w.is_empty()) {
            if !line.is_empty() {
                line.push(' ');
            }
            line.push_str(w);
        }
        size += line.len() + 1;
        records.push(line);
    }
    records
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textmodel::tokenize;

    #[test]
    fn deterministic_and_sized() {
        let a = synthetic_corpus(1, 20_000);
        assert_eq!(a, synthetic_corpus(1, 20_000));
        assert_ne!(a, synthetic_corpus(2, 20_000));
        assert!(a.iter().map(|r| r.len() + 1).sum::<usize>() >= 20_000);
    }

    #[test]
    fn survives_tokenization() {
        for record in synthetic_corpus(3, 5_000) {
            let tokens = tokenize(&record);
            assert_eq!(tokens.join(" "), record);
        }
    }
}
