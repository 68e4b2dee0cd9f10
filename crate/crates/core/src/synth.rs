//! Seeded generator of synthetic KDD-format connection records.
//!
//! The records follow the 41-column layout and the rough shape of the main
//! traffic families (web/mail/ftp sessions, SYN floods, ICMP floods, sweeps,
//! password guessing, local exploits) so the full pipeline can be exercised
//! without the real benchmark files. They are not a substitute for them.

use std::fmt::Write as _;

use rand::Rng as _;

use crate::rng;

/// Relative record counts for normal, dos, probe, r2l, u2r.
pub const DEFAULT_MIX: [f64; 5] = [0.60, 0.36, 0.025, 0.012, 0.003];

struct Columns([String; 41]);

impl Columns {
    fn base() -> Self {
        Self(std::array::from_fn(|i| match i {
            1 => "tcp".to_string(),
            2 => "http".to_string(),
            3 => "SF".to_string(),
            24..=30 | 33..=40 => "0.00".to_string(),
            _ => "0".to_string(),
        }))
    }

    fn int(&mut self, i: usize, v: u64) -> &mut Self {
        self.0[i] = v.to_string();
        self
    }

    fn rate(&mut self, i: usize, v: f64) -> &mut Self {
        self.0[i] = format!("{:.2}", v.clamp(0.0, 1.0));
        self
    }

    fn tok(&mut self, i: usize, v: &str) -> &mut Self {
        self.0[i] = v.to_string();
        self
    }
}

fn pick<'a>(rng: &mut rng::Rng, items: &[&'a str]) -> &'a str {
    items[rng.random_range(0..items.len())]
}

fn jitter(rng: &mut rng::Rng, v: f64, spread: f64) -> f64 {
    v + rng.random_range(-spread..=spread)
}

fn normal(rng: &mut rng::Rng) -> (Columns, &'static str) {
    let mut c = Columns::base();
    let service = pick(rng, &["http", "http", "http", "smtp", "ftp_data", "domain_u", "private", "ftp", "telnet"]);
    let proto = match service {
        "domain_u" | "private" => "udp",
        _ => "tcp",
    };
    c.tok(1, proto).tok(2, service).tok(3, if rng.random_bool(0.97) { "SF" } else { pick(rng, &["REJ", "S1", "RSTO"]) });
    c.int(0, if rng.random_bool(0.9) { 0 } else { rng.random_range(1..3000) });
    c.int(4, rng.random_range(100..3000));
    c.int(5, rng.random_range(0..20000));
    c.int(11, u64::from(proto == "tcp"));
    if rng.random_bool(0.05) {
        c.int(9, rng.random_range(1..5));
    }
    let count = rng.random_range(1..25);
    c.int(22, count).int(23, count + rng.random_range(0..10));
    c.rate(28, jitter(rng, 0.95, 0.05)).rate(29, rng.random_range(0.0..0.1));
    c.rate(30, rng.random_range(0.0..0.3));
    c.int(31, rng.random_range(1..256)).int(32, rng.random_range(1..256));
    c.rate(33, jitter(rng, 0.8, 0.2)).rate(34, rng.random_range(0.0..0.1));
    c.rate(35, rng.random_range(0.0..0.2)).rate(36, rng.random_range(0.0..0.1));
    (c, "normal.")
}

fn dos(rng: &mut rng::Rng) -> (Columns, &'static str) {
    let mut c = Columns::base();
    match rng.random_range(0..10) {
        0..=4 => {
            c.tok(1, "tcp").tok(2, pick(rng, &["private", "telnet", "ftp", "http", "finger"])).tok(3, "S0");
            let count = rng.random_range(100..512);
            c.int(22, count).int(23, rng.random_range(1..30));
            c.rate(24, jitter(rng, 0.98, 0.02)).rate(25, jitter(rng, 0.98, 0.02));
            c.rate(28, rng.random_range(0.0..0.15)).rate(29, jitter(rng, 0.06, 0.05));
            c.int(31, 255).int(32, rng.random_range(1..30));
            c.rate(33, rng.random_range(0.0..0.1)).rate(34, jitter(rng, 0.06, 0.05));
            c.rate(37, jitter(rng, 0.98, 0.02)).rate(38, jitter(rng, 0.98, 0.02));
            (c, "neptune.")
        }
        5..=8 => {
            c.tok(1, "icmp").tok(2, "ecr_i").tok(3, "SF");
            c.int(4, *[1032u64, 520, 1480].get(rng.random_range(0..3)).unwrap());
            let count = rng.random_range(300..512);
            c.int(22, count).int(23, count);
            c.rate(28, 1.0).int(31, 255).int(32, 255).rate(33, 1.0).rate(35, 1.0);
            (c, "smurf.")
        }
        _ => {
            c.tok(2, "http").int(4, 54540).int(5, rng.random_range(7000..9000)).int(9, 2).int(11, 1);
            c.int(22, rng.random_range(1..10)).int(23, rng.random_range(1..10)).rate(28, 1.0);
            c.int(31, rng.random_range(10..256)).int(32, rng.random_range(10..256)).rate(33, 1.0);
            (c, "back.")
        }
    }
}

fn probe(rng: &mut rng::Rng) -> (Columns, &'static str) {
    let mut c = Columns::base();
    if rng.random_bool(0.5) {
        c.tok(1, "icmp").tok(2, pick(rng, &["eco_i", "ecr_i"])).tok(3, "SF");
        c.int(4, *[8u64, 18, 20].get(rng.random_range(0..3)).unwrap());
        c.int(22, rng.random_range(1..4)).int(23, rng.random_range(1..40));
        c.rate(28, 1.0).rate(30, jitter(rng, 0.5, 0.5));
        c.int(31, rng.random_range(1..100)).int(32, rng.random_range(1..100));
        c.rate(33, 1.0).rate(35, 1.0).rate(36, jitter(rng, 0.5, 0.5));
        (c, "ipsweep.")
    } else {
        c.tok(2, pick(rng, &["private", "telnet", "ftp", "smtp", "other", "finger"])).tok(3, pick(rng, &["REJ", "RSTR", "RSTO"]));
        c.int(22, rng.random_range(1..5)).int(23, rng.random_range(1..5));
        c.rate(26, 1.0).rate(27, 1.0).rate(28, jitter(rng, 0.5, 0.5)).rate(29, jitter(rng, 0.5, 0.5));
        c.int(31, rng.random_range(1..256)).int(32, rng.random_range(1..5));
        c.rate(34, jitter(rng, 0.6, 0.4)).rate(35, jitter(rng, 0.8, 0.2));
        c.rate(39, jitter(rng, 0.8, 0.2)).rate(40, jitter(rng, 0.8, 0.2));
        (c, "portsweep.")
    }
}

fn r2l(rng: &mut rng::Rng) -> (Columns, &'static str) {
    let mut c = Columns::base();
    if rng.random_bool(0.6) {
        c.tok(2, pick(rng, &["ftp_data", "ftp"])).int(0, rng.random_range(0..20));
        c.int(4, rng.random_range(300..6000)).int(9, rng.random_range(0..30)).int(11, 1);
        c.int(21, u64::from(rng.random_bool(0.7)));
        c.int(22, rng.random_range(1..4)).int(23, rng.random_range(1..4)).rate(28, 1.0);
        c.int(31, rng.random_range(1..50)).int(32, rng.random_range(1..50)).rate(33, 1.0).rate(35, jitter(rng, 0.5, 0.5));
        (c, "warezclient.")
    } else {
        c.tok(2, "telnet").tok(3, pick(rng, &["RSTO", "SF"])).int(0, rng.random_range(1..10));
        c.int(4, rng.random_range(100..130)).int(5, rng.random_range(150..200)).int(10, 1);
        c.int(22, 1).int(23, 1).rate(28, 1.0);
        c.int(31, rng.random_range(50..256)).int(32, rng.random_range(1..20)).rate(33, jitter(rng, 0.1, 0.1));
        (c, "guess_passwd.")
    }
}

fn u2r(rng: &mut rng::Rng) -> (Columns, &'static str) {
    let mut c = Columns::base();
    c.tok(2, pick(rng, &["telnet", "ftp_data", "ftp"])).int(0, rng.random_range(20..400));
    c.int(4, rng.random_range(1000..3000)).int(5, rng.random_range(2000..9000));
    c.int(9, rng.random_range(1..4)).int(11, 1).int(12, rng.random_range(0..3));
    c.int(13, 1).int(15, rng.random_range(0..3)).int(16, rng.random_range(0..3)).int(17, u64::from(rng.random_bool(0.3)));
    c.int(22, 1).int(23, 1).rate(28, 1.0);
    c.int(31, rng.random_range(1..10)).int(32, rng.random_range(1..10)).rate(33, 1.0).rate(35, jitter(rng, 0.5, 0.5));
    (c, "buffer_overflow.")
}

/// `n` KDD-format lines (no trailing newline on the last one) with the given
/// class mix. Each class gets at least `min_per_class` records.
pub fn generate_lines(n: usize, mix: [f64; 5], min_per_class: usize, seed: u64) -> Vec<String> {
    let total: f64 = mix.iter().sum();
    let mut counts: Vec<usize> = mix
        .iter()
        .map(|w| ((w / total) * n as f64).round() as usize)
        .map(|c| c.max(min_per_class))
        .collect();
    let sum: usize = counts.iter().sum();
    if sum > n {
        counts[0] = counts[0].saturating_sub(sum - n);
    }
    let makers: [fn(&mut rng::Rng) -> (Columns, &'static str); 5] = [normal, dos, probe, r2l, u2r];
    let mut rng = rng::stream(seed, 0);
    let mut plan: Vec<usize> = counts.iter().enumerate().flat_map(|(c, &k)| std::iter::repeat_n(c, k)).collect();
    rand::seq::SliceRandom::shuffle(plan.as_mut_slice(), &mut rng);
    plan.into_iter()
        .map(|class| {
            let (cols, label) = makers[class](&mut rng);
            let mut line = cols.0.join(",");
            let _ = write!(line, ",{label}");
            line
        })
        .collect()
}

/// Same as [`generate_lines`], joined into one newline-terminated text.
pub fn generate_text(n: usize, seed: u64) -> String {
    let mut text = generate_lines(n, DEFAULT_MIX, 20, seed).join("\n");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kdd::{self, LabelMapping};

    #[test]
    fn generated_lines_parse_and_map() {
        let text = generate_text(500, 3);
        let ds = kdd::parse_kdd(text.as_bytes(), "synth", true).unwrap();
        assert_eq!(ds.len(), 500);
        let mapped = kdd::map_labels(ds, &LabelMapping::five_category()).unwrap();
        let inv = kdd::class_inventory(&mapped);
        assert_eq!(inv.len(), 5);
        assert!(inv["u2r"] >= 20);
        assert_eq!(generate_text(500, 3), text);
    }
}
