//! Event-level time-tag simulation of one conjugate detector pair.
//!
//! This is the independent check on [`crate::coincidence`]: it draws pair
//! emissions, losses, jitter, dark counts and dead time event by event and
//! counts coincidences the way a time tagger would. It only consumes the raw
//! physical parameters; none of the analytic rate formulas are used here.

use std::io::{self, BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;

use crate::coincidence::{CoincidenceConfig, DetectionSetup, DetectorSpec, PairFlux, PairStats};
use crate::error::{domain, Error, Result};

/// Minimum delay of the accidental-estimation window, in window widths.
pub const MIN_OFFSET_WINDOWS: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Origin {
    Pair,
    Dark,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Pair => "pair",
            Origin::Dark => "dark",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time_ns: f64,
    pub detector: u32,
    /// Analyzer outcome.
    pub bit: bool,
    pub origin: Origin,
}

/// Click record of one detector, sorted by timestamp.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EventStream {
    events: Vec<Event>,
}

impl EventStream {
    pub fn new(events: Vec<Event>) -> Result<Self> {
        if !is_sorted(events.iter().map(|e| e.time_ns)) {
            return Err(Error::Unsorted("events"));
        }
        Ok(Self { events })
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn times(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.time_ns).collect()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

fn is_sorted(mut times: impl Iterator<Item = f64>) -> bool {
    let Some(mut prev) = times.next() else {
        return true;
    };
    for t in times {
        if !(t >= prev) {
            return false;
        }
        prev = t;
    }
    true
}

/// Measurement basis of both analyzers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Basis {
    #[default]
    DiagonalAntidiagonal,
    HorizontalVertical,
}

/// One conjugate detector pair: analytic setup plus the flux it receives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelLink {
    pub setup: DetectionSetup<f64>,
    pub flux: PairFlux<f64>,
}

impl ChannelLink {
    /// Analytic prediction for this link, for comparison.
    pub fn analytic(&self) -> Result<PairStats<f64>> {
        self.setup.pair_stats(&self.flux)
    }

    fn survival_a(&self) -> f64 {
        self.setup.arm_a().total() * self.flux.efficiency_a
    }

    fn survival_b(&self) -> f64 {
        self.setup.arm_b().total() * self.flux.efficiency_b
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub duration_s: f64,
    pub seed: u64,
    /// Substream index, normally the channel-pair index.
    pub stream: u64,
    pub link: ChannelLink,
    pub basis: Basis,
    /// Delay applied to stream b for the accidental estimate, ns.
    pub offset_ns: f64,
}

impl McConfig {
    pub fn new(link: ChannelLink, duration_s: f64, seed: u64, stream: u64) -> Result<Self> {
        let cfg = Self {
            duration_s,
            seed,
            stream,
            link,
            basis: Basis::default(),
            offset_ns: default_offset_ns(link.setup.window().window_ns()),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(domain("simulation duration", format!("{} s must be > 0", self.duration_s)));
        }
        if self.link.flux.pairing != 1.0 {
            return Err(domain("simulation pairing", "only conjugate detector pairs (pairing 1) are simulated"));
        }
        check_offset(self.offset_ns, self.link.setup.window().window_ns())
    }
}

/// Default delayed-window offset: 1000 windows, at least 1 µs.
pub fn default_offset_ns(window_ns: f64) -> f64 {
    (1000.0 * window_ns).max(1000.0)
}

fn check_offset(offset_ns: f64, window_ns: f64) -> Result<()> {
    if offset_ns.is_finite() && offset_ns >= MIN_OFFSET_WINDOWS * window_ns {
        Ok(())
    } else {
        Err(domain(
            "accidental offset",
            format!("{offset_ns} ns must be at least {MIN_OFFSET_WINDOWS} windows ({} ns)", MIN_OFFSET_WINDOWS * window_ns),
        ))
    }
}

/// Counted statistics of one simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McCounts {
    pub singles_a: u64,
    pub singles_b: u64,
    pub coincidences: u64,
    pub offset_accidentals: u64,
    /// Coincidences whose analyzer outcomes disagree.
    pub error_coincidences: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McReport {
    pub duration_s: f64,
    pub counts: McCounts,
}

impl McReport {
    pub fn singles_a_rate(&self) -> f64 {
        self.counts.singles_a as f64 / self.duration_s
    }

    pub fn singles_b_rate(&self) -> f64 {
        self.counts.singles_b as f64 / self.duration_s
    }

    pub fn coincidence_rate(&self) -> f64 {
        self.counts.coincidences as f64 / self.duration_s
    }

    pub fn accidental_rate(&self) -> f64 {
        self.counts.offset_accidentals as f64 / self.duration_s
    }

    /// Coincidences minus the delayed-window accidental estimate.
    pub fn true_rate(&self) -> f64 {
        (self.counts.coincidences as f64 - self.counts.offset_accidentals as f64) / self.duration_s
    }

    pub fn qber(&self) -> Option<f64> {
        (self.counts.coincidences > 0).then(|| self.counts.error_coincidences as f64 / self.counts.coincidences as f64)
    }

    pub fn visibility(&self) -> Option<f64> {
        self.qber().map(|q| 1.0 - 2.0 * q)
    }
}

#[derive(Debug, Clone)]
pub struct McRun {
    pub a: EventStream,
    pub b: EventStream,
    pub report: McReport,
}

const STREAM_PAIRS: u64 = 0;
const STREAM_DARK_A: u64 = 1;
const STREAM_DARK_B: u64 = 2;
const STREAMS_PER_CHANNEL: u64 = 4;

fn substream(seed: u64, channel: u64, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(channel * STREAMS_PER_CHANNEL + purpose);
    rng
}

fn jitter<R: Rng>(rng: &mut R, sigma_ns: f64) -> f64 {
    if sigma_ns > 0.0 {
        let z: f64 = StandardNormal.sample(rng);
        sigma_ns * z
    } else {
        0.0
    }
}

fn poisson_times<R: Rng>(rng: &mut R, rate_per_s: f64, duration_ns: f64, mut each: impl FnMut(&mut R, f64)) {
    if !(rate_per_s > 0.0) {
        return;
    }
    let gaps = Exp::new(rate_per_s * 1e-9).expect("positive rate");
    let mut t = 0.0;
    loop {
        t += gaps.sample(rng);
        if t > duration_ns {
            break;
        }
        each(rng, t);
    }
}

fn add_darks(events: &mut Vec<Event>, det: &DetectorSpec<f64>, id: u32, duration_ns: f64, mut rng: ChaCha8Rng) {
    poisson_times(&mut rng, det.dark_rate(), duration_ns, |rng, t| {
        events.push(Event {
            time_ns: t,
            detector: id,
            bit: rng.random(),
            origin: Origin::Dark,
        });
    });
}

// Sort and drop clicks inside the non-paralyzable dead time of the previous
// registered click.
fn finish_stream(mut events: Vec<Event>, dead_time_ns: f64) -> EventStream {
    events.sort_by(|x, y| x.time_ns.total_cmp(&y.time_ns));
    if dead_time_ns > 0.0 {
        let mut last = f64::NEG_INFINITY;
        events.retain(|e| {
            if e.time_ns >= last + dead_time_ns {
                last = e.time_ns;
                true
            } else {
                false
            }
        });
    }
    EventStream { events }
}

/// Simulates one conjugate detector pair for `cfg.duration_s`.
///
/// Deterministic in `(cfg.seed, cfg.stream)` and the physical parameters.
pub fn simulate_channel_pair(cfg: &McConfig) -> Result<McRun> {
    cfg.validate()?;
    let link = &cfg.link;
    let det_a = *link.setup.detector_a();
    let det_b = *link.setup.detector_b();
    let duration_ns = cfg.duration_s * 1e9;
    let (eta_a, eta_b) = (link.survival_a(), link.survival_b());
    let flip = (1.0 - link.setup.intrinsic_visibility()) / 2.0;
    let (id_a, id_b) = (2 * cfg.stream as u32, 2 * cfg.stream as u32 + 1);

    let expected = link.flux.pair_rate * cfg.duration_s;
    let mut a = Vec::with_capacity((expected * eta_a * 1.1) as usize + 16);
    let mut b = Vec::with_capacity((expected * eta_b * 1.1) as usize + 16);

    let mut rng = substream(cfg.seed, cfg.stream, STREAM_PAIRS);
    poisson_times(&mut rng, link.flux.pair_rate, duration_ns, |rng, t| {
        let keep_a = rng.random::<f64>() < eta_a;
        let keep_b = rng.random::<f64>() < eta_b;
        let bit_a: bool = rng.random();
        let bit_b = bit_a ^ (rng.random::<f64>() < flip);
        let ta = t + jitter(rng, det_a.jitter_sigma_ns());
        let tb = t + jitter(rng, det_b.jitter_sigma_ns());
        if keep_a && (0.0..=duration_ns).contains(&ta) {
            a.push(Event { time_ns: ta, detector: id_a, bit: bit_a, origin: Origin::Pair });
        }
        if keep_b && (0.0..=duration_ns).contains(&tb) {
            b.push(Event { time_ns: tb, detector: id_b, bit: bit_b, origin: Origin::Pair });
        }
    });
    add_darks(&mut a, &det_a, id_a, duration_ns, substream(cfg.seed, cfg.stream, STREAM_DARK_A));
    add_darks(&mut b, &det_b, id_b, duration_ns, substream(cfg.seed, cfg.stream, STREAM_DARK_B));

    let a = finish_stream(a, det_a.dead_time_ns());
    let b = finish_stream(b, det_b.dead_time_ns());

    let window = *link.setup.window();
    let (ta, tb) = (a.times(), b.times());
    let matches = match_events(&ta, &tb, window.window_ns(), 0.0)?;
    let errors = matches
        .iter()
        .filter(|&&(i, j)| a.events[i].bit != b.events[j].bit)
        .count();
    let offset = match_events(&ta, &tb, window.window_ns(), cfg.offset_ns)?;

    let counts = McCounts {
        singles_a: a.len() as u64,
        singles_b: b.len() as u64,
        coincidences: matches.len() as u64,
        offset_accidentals: offset.len() as u64,
        error_coincidences: errors as u64,
    };
    Ok(McRun {
        a,
        b,
        report: McReport {
            duration_s: cfg.duration_s,
            counts,
        },
    })
}

/// Runs several simulations concurrently; results come back in input order.
pub fn simulate_many(cfgs: &[McConfig]) -> Vec<Result<McReport>> {
    cfgs.par_iter()
        .map(|c| simulate_channel_pair(c).map(|r| r.report))
        .collect()
}

/// Pairs events of `a` with events of `b` delayed by `shift_ns` whenever
/// `|t_a - (t_b + shift)| <= window/2`.
///
/// Matching is greedy nearest-first over all candidate pairs, each event used
/// at most once. Returns `(index_a, index_b)` sorted by `index_a`.
pub fn match_events(a: &[f64], b: &[f64], window_ns: f64, shift_ns: f64) -> Result<Vec<(usize, usize)>> {
    if !is_sorted(a.iter().copied()) {
        return Err(Error::Unsorted("a"));
    }
    if !is_sorted(b.iter().copied()) {
        return Err(Error::Unsorted("b"));
    }
    let half = window_ns / 2.0;
    let mut candidates: Vec<(f64, f64, f64, usize, usize)> = Vec::new();
    let mut start = 0;
    for (i, &ta) in a.iter().enumerate() {
        while start < b.len() && b[start] + shift_ns < ta - half {
            start += 1;
        }
        let mut j = start;
        while j < b.len() && b[j] + shift_ns <= ta + half {
            let tb = b[j] + shift_ns;
            let dt = (ta - tb).abs();
            if dt <= half {
                candidates.push((dt, ta + tb, ta.min(tb), i, j));
            }
            j += 1;
        }
    }
    candidates.sort_by(|x, y| {
        x.0.total_cmp(&y.0)
            .then(x.1.total_cmp(&y.1))
            .then(x.2.total_cmp(&y.2))
    });
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut out = Vec::new();
    for &(_, _, _, i, j) in &candidates {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            out.push((i, j));
        }
    }
    out.sort_unstable();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoincidenceCount {
    pub coincidences: u64,
    /// Matches against stream b delayed by the offset.
    pub accidentals: u64,
}

/// Coincidences at zero delay plus the delayed-window accidental estimate.
pub fn count_coincidences(a: &[f64], b: &[f64], cfg: &CoincidenceConfig<f64>, offset_ns: f64) -> Result<CoincidenceCount> {
    check_offset(offset_ns, cfg.window_ns())?;
    Ok(CoincidenceCount {
        coincidences: match_events(a, b, cfg.window_ns(), 0.0)?.len() as u64,
        accidentals: match_events(a, b, cfg.window_ns(), offset_ns)?.len() as u64,
    })
}

/// One Monte Carlo statistic next to its analytic expectation, in counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub statistic: &'static str,
    pub observed: f64,
    pub expected: f64,
    pub sigma: f64,
}

impl Comparison {
    pub fn z_score(&self) -> f64 {
        if self.sigma > 0.0 {
            (self.observed - self.expected) / self.sigma
        } else if self.observed == self.expected {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn within(&self, sigmas: f64) -> bool {
        self.z_score().abs() <= sigmas
    }
}

/// Compares counted statistics with an analytic prediction using Poisson
/// (and, for error fractions, binomial) standard deviations.
///
/// `singles`, `accidentals` and `trues` are counts over the run; `qber` and
/// `visibility` are fractions of the counted coincidences.
pub fn compare(report: &McReport, analytic: &PairStats<f64>) -> Vec<Comparison> {
    let t = report.duration_s;
    let c = &report.counts;
    let poisson = |statistic, observed: u64, rate: f64| Comparison {
        statistic,
        observed: observed as f64,
        expected: rate * t,
        sigma: (rate * t).sqrt(),
    };
    let mut out = vec![
        poisson("singles_a", c.singles_a, analytic.singles_a),
        poisson("singles_b", c.singles_b, analytic.singles_b),
        poisson("accidentals", c.offset_accidentals, analytic.accidentals),
        Comparison {
            statistic: "trues",
            observed: c.coincidences as f64 - c.offset_accidentals as f64,
            expected: analytic.trues * t,
            sigma: ((analytic.trues + 2.0 * analytic.accidentals) * t).sqrt(),
        },
    ];
    let n = c.coincidences as f64;
    let q = analytic.qber;
    let (observed_q, sigma_q) = if n > 0.0 {
        (c.error_coincidences as f64 / n, (q * (1.0 - q) / n).sqrt())
    } else {
        (f64::NAN, f64::INFINITY)
    };
    out.push(Comparison {
        statistic: "qber",
        observed: observed_q,
        expected: q,
        sigma: sigma_q,
    });
    out.push(Comparison {
        statistic: "visibility",
        observed: 1.0 - 2.0 * observed_q,
        expected: analytic.visibility,
        sigma: 2.0 * sigma_q,
    });
    out
}

/// Writes the streams merged in time order, one event per line:
/// `timestamp_ns detector_id pol_bit origin`.
pub fn write_time_tags<W: Write>(mut w: W, streams: &[&EventStream], config_hash: &str) -> io::Result<()> {
    writeln!(w, "# qlink time tags config_hash={config_hash}")?;
    writeln!(w, "# timestamp_ns detector_id pol_bit origin")?;
    let mut merged: Vec<&Event> = streams.iter().flat_map(|s| s.events()).collect();
    merged.sort_by(|x, y| x.time_ns.total_cmp(&y.time_ns));
    for e in merged {
        writeln!(w, "{} {} {} {}", e.time_ns, e.detector, e.bit as u8, e.origin.as_str())?;
    }
    Ok(())
}

/// Parses a dump written by [`write_time_tags`]; returns the config hash and events.
pub fn read_time_tags<R: BufRead>(r: R) -> io::Result<(Option<String>, Vec<Event>)> {
    let bad = |line: usize, msg: &str| io::Error::new(io::ErrorKind::InvalidData, format!("line {line}: {msg}"));
    let mut hash = None;
    let mut events = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(h) = comment.split_whitespace().find_map(|w| w.strip_prefix("config_hash=")) {
                hash = Some(h.to_string());
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            return Err(bad(n + 1, "expected 4 fields"));
        }
        let time_ns = f[0].parse().map_err(|_| bad(n + 1, "bad timestamp"))?;
        let detector = f[1].parse().map_err(|_| bad(n + 1, "bad detector id"))?;
        let bit = match f[2] {
            "0" => false,
            "1" => true,
            _ => return Err(bad(n + 1, "bad polarization bit")),
        };
        let origin = match f[3] {
            "pair" => Origin::Pair,
            "dark" => Origin::Dark,
            _ => return Err(bad(n + 1, "bad origin")),
        };
        events.push(Event { time_ns, detector, bit, origin });
    }
    Ok((hash, events))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coincidence::{ArmEfficiency, DetectorSpec};
    use crate::units::AttenuationDb;

    fn link(pair_rate: f64, eta: f64, jitter: f64, dead: f64, dark: f64, window: f64) -> ChannelLink {
        let det = DetectorSpec::new(eta, jitter, dead, dark).unwrap();
        let arm = ArmEfficiency::new(1.0, 1.0, 1.0, AttenuationDb::zero(), eta).unwrap();
        ChannelLink {
            setup: DetectionSetup::new(arm, arm, det, det, CoincidenceConfig::new(window).unwrap(), 0.98).unwrap(),
            flux: PairFlux::lossless(pair_rate),
        }
    }

    #[test]
    fn hand_enumerated_coincidence() {
        let cfg = CoincidenceConfig::new(1.0).unwrap();
        let c = count_coincidences(&[0.0, 10.0, 20.0], &[0.3, 15.0], &cfg, 1000.0).unwrap();
        assert_eq!(c.coincidences, 1);
        assert_eq!(c.accidentals, 0);
    }

    #[test]
    fn empty_streams() {
        let cfg = CoincidenceConfig::new(1.0).unwrap();
        let c = count_coincidences(&[], &[1.0, 2.0], &cfg, 1000.0).unwrap();
        assert_eq!((c.coincidences, c.accidentals), (0, 0));
        let c = count_coincidences(&[1.0], &[], &cfg, 1000.0).unwrap();
        assert_eq!((c.coincidences, c.accidentals), (0, 0));
    }

    #[test]
    fn unsorted_and_small_offset_rejected() {
        let cfg = CoincidenceConfig::new(1.0).unwrap();
        assert_eq!(count_coincidences(&[2.0, 1.0], &[1.0], &cfg, 1000.0), Err(Error::Unsorted("a")));
        assert_eq!(count_coincidences(&[1.0], &[3.0, 1.0], &cfg, 1000.0), Err(Error::Unsorted("b")));
        assert!(count_coincidences(&[1.0], &[1.0], &cfg, 99.0).is_err());
        assert!(count_coincidences(&[1.0], &[1.0], &cfg, 100.0).is_ok());
    }

    #[test]
    fn nearest_match_wins() {
        // a[0] takes the nearer b[1]; a[1] falls back to b[0], 0.4 ns away
        let m = match_events(&[1.0, 1.2], &[0.8, 1.05], 1.0, 0.0).unwrap();
        assert_eq!(m, vec![(0, 1), (1, 0)]);
        let m = match_events(&[1.0], &[0.6, 1.05, 1.3], 1.0, 0.0).unwrap();
        assert_eq!(m, vec![(0, 1)]);
    }

    #[test]
    fn window_edge_is_inclusive() {
        assert_eq!(match_events(&[0.0], &[0.5], 1.0, 0.0).unwrap().len(), 1);
        assert_eq!(match_events(&[0.0], &[0.5000001], 1.0, 0.0).unwrap().len(), 0);
    }

    #[test]
    fn dark_only_singles() {
        let cfg = McConfig::new(link(0.0, 0.5, 0.0, 0.0, 100.0, 1.0), 10.0, 11, 0).unwrap();
        let run = simulate_channel_pair(&cfg).unwrap();
        let bound = 3.0 * 1000f64.sqrt();
        for n in [run.report.counts.singles_a, run.report.counts.singles_b] {
            assert!((n as f64 - 1000.0).abs() <= bound, "{n}");
        }
        assert!(run.a.events().iter().all(|e| e.origin == Origin::Dark));
    }

    #[test]
    fn same_seed_same_report() {
        let cfg = McConfig::new(link(2e5, 0.4, 0.3, 0.0, 500.0, 2.0), 0.2, 99, 3).unwrap();
        let x = simulate_channel_pair(&cfg).unwrap();
        let y = simulate_channel_pair(&cfg).unwrap();
        assert_eq!(x.report, y.report);
        assert_eq!(x.a, y.a);
        let other = McConfig { seed: 100, ..cfg };
        assert_ne!(simulate_channel_pair(&other).unwrap().a, x.a);
    }

    #[test]
    fn timestamps_stay_in_range_and_sorted() {
        let cfg = McConfig::new(link(1e5, 0.5, 5.0, 0.0, 1e3, 2.0), 0.05, 1, 0).unwrap();
        let run = simulate_channel_pair(&cfg).unwrap();
        for s in [&run.a, &run.b] {
            assert!(is_sorted(s.events().iter().map(|e| e.time_ns)));
            assert!(s.events().iter().all(|e| (0.0..=0.05e9).contains(&e.time_ns)));
        }
        assert!(run.report.counts.error_coincidences <= run.report.counts.coincidences);
    }

    #[test]
    fn dead_time_never_adds_clicks() {
        let base = McConfig::new(link(3e6, 0.5, 0.0, 0.0, 0.0, 1.0), 0.01, 5, 0).unwrap();
        let mut prev = u64::MAX;
        for dead in [0.0, 10.0, 50.0, 200.0] {
            let cfg = McConfig { link: link(3e6, 0.5, 0.0, dead, 0.0, 1.0), ..base };
            let n = simulate_channel_pair(&cfg).unwrap().report.counts.singles_a;
            assert!(n <= prev);
            prev = n;
        }
    }

    #[test]
    fn dump_round_trip() {
        let cfg = McConfig::new(link(1e4, 0.5, 0.1, 0.0, 1e3, 2.0), 0.01, 2, 0).unwrap();
        let run = simulate_channel_pair(&cfg).unwrap();
        let mut buf = Vec::new();
        write_time_tags(&mut buf, &[&run.a, &run.b], "abc123").unwrap();
        let (hash, events) = read_time_tags(&buf[..]).unwrap();
        assert_eq!(hash.as_deref(), Some("abc123"));
        assert_eq!(events.len(), run.a.len() + run.b.len());
        assert!(is_sorted(events.iter().map(|e| e.time_ns)));
        let a: Vec<Event> = events.iter().filter(|e| e.detector == 0).copied().collect();
        assert_eq!(a, run.a.events());
    }
}
