//! Regenerate the fixtures under `fixtures/`:
//!
//! * `20ng_subset/docs.jsonl` — 2,000 synthetic newsgroup-style posts over the
//!   twenty newsgroup categories (`{"id", "group", "text"}` per line);
//! * `20ng_subset/minilm-l6.emb` + `.ids.jsonl` — 384-dimensional stand-in
//!   sentence embeddings, one per post;
//! * `MANIFEST` — SHA-256 of every generated file and of embedding row 0.
//!
//! The posts are drawn from a mixed-membership generative model: each post
//! has a home group, sometimes a secondary group, and mixes group-specific
//! vocabulary with shared conversational words, stopwords, numbers, quoting
//! and mail headers. The embedding of a post is the L2-normalised TF-IDF
//! weighted sum of fixed per-word vectors, where words of one group share a
//! group direction and related groups (comp.*, rec.*, ...) share a
//! hierarchy direction; a small per-post perturbation is added.
//!
//! Usage: `cargo run -p topiceval-cli --example make_fixture [-- OUT_DIR]`

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use sha2::{Digest, Sha256};
use topiceval_core::embed::{row_bytes, write_embeddings};
use topiceval_core::EmbeddingMatrix;

const SEED: u64 = 20_000;
const N_DOCS: usize = 2_000;
const DIM: usize = 384;
const LEAK_SHARE: f64 = 0.05;

/// (group, hierarchy, characteristic words)
const GROUPS: &[(&str, &str, &str)] = &[
    ("alt.atheism", "religion", "atheism atheist atheists god belief beliefs religion religious bible moral morality evidence existence faith islam argument arguments claim truth objective philosophy theism christians believe exist reason logic contradiction scripture dogma skeptic secular universe purpose burden"),
    ("comp.graphics", "comp", "graphics image images format formats jpeg gif polygon rendering render pixel pixels color colors bitmap animation texture shading vector algorithm display resolution viewer conversion palette software tiff sphere surface raytracing visualization")
    ,
    ("comp.os.ms-windows.misc", "comp", "windows dos microsoft driver drivers file files program programs directory install setup memory font fonts printer config menu application applications manager desktop icon icons swap mode error version disk boot utility"),
    ("comp.sys.ibm.pc.hardware", "comp", "drive drives disk controller scsi ide card cards bios motherboard board jumper floppy hard port ports irq cable cables modem bus isa chip cache memory ram slot slots pc clone megabyte"),
    ("comp.sys.mac.hardware", "comp", "mac apple quadra centris powerbook monitor monitors simm simms nubus lc duo powerpc keyboard adb hardware upgrade processor video vram sound serial fpu mhz iisi classic performa accelerator"),
    ("comp.windows.x", "comp", "window widget widgets server client xterm motif application display event events library libraries openwindows resource resources toolkit manager compile compiled source function callback xlib font colormap unix code patch"),
    ("misc.forsale", "sale", "sale offer shipping price condition sell selling asking brand new used box manual excellent mint included interested email buyer obo cash stereo speakers camera games collection pair items negotiable original warranty"),
    ("rec.autos", "rec", "car cars engine dealer ford toyota honda oil tires tire driving brake brakes transmission wheel mileage sedan model models speed highway gas fuel insurance convertible luxury vehicle vehicles parking repair"),
    ("rec.motorcycles", "rec", "bike bikes motorcycle motorcycles ride riding rider riders helmet dod honda yamaha harley bmw kawasaki suzuki lane road gear throttle clutch leather countersteering passenger seat engine touring shaft tank"),
    ("rec.sport.baseball", "rec", "baseball game games team teams season pitcher pitchers pitching hitter hitters inning innings runs league players player braves yankees cubs mets giants dodgers batting average fans stadium catcher homer"),
    ("rec.sport.hockey", "rec", "hockey team teams game games season playoff playoffs nhl players player goal goals goalie penguins leafs bruins rangers canadiens devils wings puck ice period shots coach cup fans scoring"),
    ("sci.crypt", "sci", "encryption key keys clipper chip algorithm secure security privacy escrow government nsa crypto cryptography cipher public secret des rsa wiretap phone phones pgp code message messages protocol agencies decrypt"),
    ("sci.electronics", "sci", "circuit circuits voltage current power amp amplifier resistor capacitor signal signals ground wire wiring battery batteries frequency transistor output input chip design supply radio detector led switch audio"),
    ("sci.med", "sci", "doctor doctors patients patient disease medical medicine treatment symptoms drug drugs pain cancer diet health infection clinical study studies blood therapy diagnosis physician chronic allergy diseases vitamin syndrome"),
    ("sci.space", "sci", "space nasa orbit launch shuttle moon mission missions satellite satellites earth solar lunar rocket spacecraft station mars planet planets astronaut probe flight gravity telescope payload propulsion jupiter comet"),
    ("soc.religion.christian", "religion", "christian christians jesus church churches christ god bible faith sin sins prayer scripture catholic lord spirit heaven salvation grace holy worship gospel teaching doctrine baptism resurrection love apostles"),
    ("talk.politics.guns", "politics", "gun guns firearms weapon weapons batf fbi waco koresh compound amendment control rifle rifles handgun handguns militia crime criminals ammunition law laws police shooting assault nra violence permit"),
    ("talk.politics.mideast", "politics", "israel israeli israelis arab arabs palestinian palestinians jews jewish turkish turkey armenian armenians genocide lebanon syria peace land occupied territories villages massacre war soldiers muslims iran zionism"),
    ("talk.politics.misc", "politics", "government tax taxes president clinton congress federal policy economy jobs health insurance welfare spending budget deficit vote voting state states rights liberal conservative administration senate legislation unemployment"),
    ("talk.religion.misc", "religion", "religion god jesus bible cult cults koresh moral christian morality faith prophecy truth spiritual belief sacred revelation biblical followers myth scripture divine absolute teachings objective authority"),
];

const GENERAL: &str = "people time think know good like make way problem question thanks article writes point years work right post read information help need really want said better sure thing things long little number case new system world fact believe different course question mail list group net reply agree mean true real day used using look looks life free best seen try tried got getting find found idea ideas interested understand person real simply possible note send thought wrong stuff answer answers certainly actually matter start kind lot hear heard having likely little world country company home small large local issue issues general keep left getting ago today week month year place area second third later early old public half line lines small tell told talk";

const STOPWORDS: &str = "the the the the of of of and and and to to a a a in in is is it it that that for for this this be be on on are with as was have not but you you i i i we they he or an at by from if my can would will there all what so about one no do some which their has more just any me";

const FIRST: &[&str] = &["john", "mary", "steve", "david", "susan", "mike", "karen", "robert", "linda", "james", "paul", "laura", "peter", "anne", "mark", "chris", "kevin", "nancy", "tom", "lisa"];
const HOSTS: &[&str] = &["cs.cmu.edu", "mit.edu", "netcom.com", "uiuc.edu", "berkeley.edu", "austin.ibm.com", "ohio-state.edu", "sun.com", "cco.caltech.edu", "umich.edu"];

fn words(s: &str) -> Vec<&str> {
    s.split_whitespace().collect()
}

/// Zipf-weighted index into a list of length `n`.
fn zipf(rng: &mut ChaCha8Rng, n: usize, s: f64) -> usize {
    let norm: f64 = (1..=n).map(|r| (r as f64).powf(-s)).sum();
    let mut u = rng.gen::<f64>() * norm;
    for r in 1..=n {
        u -= (r as f64).powf(-s);
        if u <= 0.0 {
            return r - 1;
        }
    }
    n - 1
}

struct Post {
    id: String,
    group: usize,
    text: String,
}

fn generate_posts(rng: &mut ChaCha8Rng) -> Vec<Post> {
    let general = words(GENERAL);
    let stop = words(STOPWORDS);
    let groups: Vec<Vec<&str>> = GROUPS
        .iter()
        .map(|(_, _, ws)| {
            let mut v = words(ws);
            // per-group random frequency ranking, fixed by the seed
            v.shuffle(rng);
            v
        })
        .collect();
    let length = LogNormal::new(4.4, 0.6).expect("valid parameters");

    let mut posts = Vec::with_capacity(N_DOCS);
    for i in 0..N_DOCS {
        let g = i % GROUPS.len();
        let second = if rng.gen_bool(0.4) {
            let mut h = rng.gen_range(0..GROUPS.len() - 1);
            if h >= g {
                h += 1;
            }
            Some(h)
        } else {
            None
        };
        let home_share = rng.gen_range(0.10..0.26);
        let second_share = if second.is_some() { rng.gen_range(0.04..0.12) } else { 0.0 };
        let stop_share = 0.33;
        let n_words = (length.sample(rng) as usize).clamp(25, 600);

        let pick = |rng: &mut ChaCha8Rng| -> String {
            let u: f64 = rng.gen();
            if u < home_share {
                groups[g][zipf(rng, groups[g].len(), 0.9)].to_owned()
            } else if u < home_share + second_share {
                let h = second.expect("share is zero without a second group");
                groups[h][zipf(rng, groups[h].len(), 0.9)].to_owned()
            } else if u < home_share + second_share + LEAK_SHARE {
                // topical words turn up in unrelated threads too
                let h = rng.gen_range(0..groups.len());
                groups[h][rng.gen_range(0..groups[h].len())].to_owned()
            } else if u < home_share + second_share + LEAK_SHARE + stop_share {
                stop[rng.gen_range(0..stop.len())].to_owned()
            } else if u < 0.97 {
                general[zipf(rng, general.len(), 0.7)].to_owned()
            } else {
                // numbers, versions and prices are dropped by the tokenizer
                match rng.gen_range(0..3) {
                    0 => format!("{}", rng.gen_range(1..2000)),
                    1 => format!("{}.{}", rng.gen_range(1..9), rng.gen_range(0..10)),
                    _ => format!("${}", rng.gen_range(5..900)),
                }
            }
        };

        let first = FIRST[rng.gen_range(0..FIRST.len())];
        let host = HOSTS[rng.gen_range(0..HOSTS.len())];
        let subject: Vec<String> = (0..rng.gen_range(2..5))
            .map(|_| groups[g][zipf(rng, groups[g].len(), 0.9)].to_owned())
            .collect();
        let mut text = format!(
            "From: {first}@{host}\nSubject: {}{}\n\n",
            if rng.gen_bool(0.4) { "Re: " } else { "" },
            subject.join(" ")
        );
        let mut written = 0;
        let mut quoting = rng.gen_bool(0.35);
        if quoting {
            let _ = writeln!(text, "In article <{}@{host}>, {first} writes:", rng.gen_range(1000..99999));
        }
        while written < n_words {
            let len = rng.gen_range(6..18).min(n_words - written);
            let mut sentence: Vec<String> = (0..len).map(|_| pick(rng)).collect();
            if let Some(w) = sentence.first_mut() {
                let mut c = w.chars();
                if let Some(f) = c.next() {
                    *w = f.to_uppercase().chain(c).collect();
                }
            }
            let end = [".", ".", ".", "?", "!"][rng.gen_range(0..5)];
            if quoting {
                text.push_str("> ");
            }
            if len > 4 && rng.gen_bool(0.3) {
                let at = rng.gen_range(1..len - 1);
                sentence[at].push(',');
            }
            let _ = writeln!(text, "{}{end}", sentence.join(" "));
            written += len;
            if quoting && rng.gen_bool(0.4) {
                quoting = false;
                text.push('\n');
            }
        }
        if rng.gen_bool(0.5) {
            let _ = write!(text, "\n-- \n{} | {host}\n", first.to_uppercase());
        }
        posts.push(Post {
            id: format!("{}/{}", GROUPS[g].0, 50_000 + i),
            group: g,
            text,
        });
    }
    posts.shuffle(rng);
    posts
}

/// Deterministic unit vector for `key`.
fn unit_vector(key: &str, salt: u64) -> Vec<f64> {
    let digest = Sha256::digest(format!("{salt}:{key}").as_bytes());
    let seed = u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("valid parameters");
    let v: Vec<f64> = (0..DIM).map(|_| normal.sample(&mut rng)).collect();
    normalize(v)
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    v
}

fn mix(parts: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = vec![0.0; DIM];
    for (w, v) in parts {
        for (o, x) in out.iter_mut().zip(v.iter()) {
            *o += w * x;
        }
    }
    out
}

/// Word vectors: group words lean towards their group direction, which in turn
/// leans towards the hierarchy direction; shared words get their own direction.
fn word_vectors() -> HashMap<String, Vec<f64>> {
    let mut hierarchy: HashMap<&str, Vec<f64>> = HashMap::new();
    for (_, h, _) in GROUPS {
        hierarchy.entry(h).or_insert_with(|| unit_vector(h, 1));
    }
    let mut members: HashMap<String, Vec<Vec<f64>>> = HashMap::new();
    for (name, h, ws) in GROUPS {
        let group = normalize(mix(&[(0.3, &hierarchy[h]), (1.0, &unit_vector(name, 2))]));
        for w in words(ws) {
            let own = unit_vector(w, 3);
            members
                .entry(w.to_owned())
                .or_default()
                .push(normalize(mix(&[(0.75, &group), (0.66, &own)])));
        }
    }
    let mut vectors: HashMap<String, Vec<f64>> = members
        .into_iter()
        .map(|(w, vs)| {
            let refs: Vec<(f64, &[f64])> = vs.iter().map(|v| (1.0, v.as_slice())).collect();
            (w, normalize(mix(&refs)))
        })
        .collect();
    for w in words(GENERAL) {
        vectors.entry(w.to_owned()).or_insert_with(|| unit_vector(w, 4));
    }
    vectors
}

fn simple_tokens(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphabetic())
        .filter(|t| t.len() >= 2)
        .map(str::to_owned)
        .collect()
}

fn embed(posts: &[Post], rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let vectors = word_vectors();
    let tokenized: Vec<Vec<String>> = posts.iter().map(|p| simple_tokens(&p.text)).collect();
    let mut df: HashMap<&str, usize> = HashMap::new();
    for toks in &tokenized {
        let mut seen: Vec<&str> = toks.iter().map(String::as_str).collect();
        seen.sort_unstable();
        seen.dedup();
        for t in seen {
            *df.entry(t).or_default() += 1;
        }
    }
    let n = posts.len() as f64;
    let noise = Normal::new(0.0, 0.02).expect("valid parameters");
    tokenized
        .iter()
        .map(|toks| {
            let mut tf: HashMap<&str, f64> = HashMap::new();
            for t in toks {
                *tf.entry(t.as_str()).or_default() += 1.0;
            }
            let mut terms: Vec<(&str, f64)> = tf.into_iter().collect();
            terms.sort_by(|a, b| a.0.cmp(b.0));
            let mut v = vec![0.0; DIM];
            for (t, c) in terms {
                let Some(wv) = vectors.get(t) else { continue };
                let w = (1.0 + c.ln()) * (n / df[t] as f64).ln();
                for (o, x) in v.iter_mut().zip(wv) {
                    *o += w * x;
                }
            }
            let v = normalize(v);
            normalize(v.into_iter().map(|x| x + noise.sample(rng)).collect())
        })
        .collect()
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures"));
    let dir = out.join("20ng_subset");
    fs::create_dir_all(&dir)?;

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let posts = generate_posts(&mut rng);
    let mut jsonl = String::new();
    for p in &posts {
        jsonl.push_str(&serde_json::to_string(&serde_json::json!({
            "id": p.id,
            "group": GROUPS[p.group].0,
            "text": p.text,
        }))?);
        jsonl.push('\n');
    }
    fs::write(dir.join("docs.jsonl"), &jsonl)?;

    let rows = embed(&posts, &mut rng);
    let ids: Vec<String> = posts.iter().map(|p| p.id.clone()).collect();
    let matrix = EmbeddingMatrix::new(N_DOCS, DIM, rows.concat(), ids)?;
    let emb_path = dir.join("minilm-l6.emb");
    write_embeddings(&emb_path, &matrix)?;

    let mut manifest = format!(
        "# generated by `cargo run -p topiceval-cli --example make_fixture` (seed {SEED})\n\
         n_docs {N_DOCS}\ndim {DIM}\nrow0_sha256 {}\n",
        sha256_hex(&row_bytes(&matrix, 0))
    );
    for name in ["docs.jsonl", "minilm-l6.emb", "minilm-l6.ids.jsonl"] {
        let _ = writeln!(manifest, "sha256 20ng_subset/{name} {}", sha256_hex(&fs::read(dir.join(name))?));
    }
    fs::write(out.join("MANIFEST"), manifest)?;
    println!("wrote {} posts and {}x{} embeddings to {}", posts.len(), N_DOCS, DIM, dir.display());
    Ok(())
}
