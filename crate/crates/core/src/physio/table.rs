//! Per-symbol metric table built by a registry of named extractors, one per
//! signal source.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::heart::heart_rate;
use super::scr::{detect_scrs, ScrEvent, DEFAULT_MIN_AMPLITUDE_US};
use super::spectral::{welch, Band, WelchParams};
use super::{pupil_dilation_pct, PhysioError};
use crate::gaze::{PhysioWindow, SymbolHit};
use crate::recorder::{SessionData, StreamData};
use crate::stream::Modality;

/// Column names usable as script variables, in CSV order.
pub const METRIC_NAMES: [&str; 8] = [
    "gaze_duration_ms",
    "scr_count",
    "scr_mean_rise_s",
    "pupil_dilation_pct",
    "alpha_power",
    "theta_power",
    "heart_rate_bpm",
    "temp_c",
];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub symbol_id: String,
    pub file: String,
    pub gaze_duration_ms: f64,
    pub scr_count: Option<u32>,
    pub scr_mean_rise_s: Option<f64>,
    pub pupil_dilation_pct: Option<f64>,
    pub alpha_power: Option<f64>,
    pub theta_power: Option<f64>,
    pub heart_rate_bpm: Option<f64>,
    pub temp_c: Option<f64>,
}

impl MetricRow {
    pub fn get(&self, name: &str) -> Option<f64> {
        match name {
            "gaze_duration_ms" => Some(self.gaze_duration_ms),
            "scr_count" => self.scr_count.map(f64::from),
            "scr_mean_rise_s" => self.scr_mean_rise_s,
            "pupil_dilation_pct" => self.pupil_dilation_pct,
            "alpha_power" => self.alpha_power,
            "theta_power" => self.theta_power,
            "heart_rate_bpm" => self.heart_rate_bpm,
            "temp_c" => self.temp_c,
            _ => None,
        }
    }
}

/// Rows ordered by symbol id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricTable {
    pub rows: Vec<MetricRow>,
}

impl MetricTable {
    pub fn from_rows(mut rows: Vec<MetricRow>) -> Self {
        rows.sort_by(|a, b| a.symbol_id.cmp(&b.symbol_id));
        MetricTable { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, symbol_id: &str) -> Option<&MetricRow> {
        self.rows
            .binary_search_by(|r| r.symbol_id.as_str().cmp(symbol_id))
            .ok()
            .map(|i| &self.rows[i])
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), PhysioError> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.rows {
            out.serialize(r).map_err(|e| PhysioError::Table(e.to_string()))?;
        }
        if self.rows.is_empty() {
            let mut header = vec!["symbol_id", "file"];
            header.extend(METRIC_NAMES);
            out.write_record(header).map_err(|e| PhysioError::Table(e.to_string()))?;
        }
        out.flush().map_err(|e| PhysioError::Table(e.to_string()))
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self, PhysioError> {
        let rows = csv::Reader::from_reader(r)
            .deserialize()
            .collect::<Result<Vec<MetricRow>, _>>()
            .map_err(|e| PhysioError::Table(e.to_string()))?;
        Ok(Self::from_rows(rows))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricParams {
    pub scr_min_amplitude_us: f64,
    pub welch: WelchParams,
    pub alpha: Band,
    pub theta: Band,
    /// Heart rate is estimated on a window of this length centred on each fixation.
    pub heart_window_s: f64,
    /// Extractor names to run, in order.
    pub extractors: Vec<String>,
}

impl Default for MetricParams {
    fn default() -> Self {
        MetricParams {
            scr_min_amplitude_us: DEFAULT_MIN_AMPLITUDE_US,
            welch: WelchParams::default(),
            alpha: Band::alpha(),
            theta: Band::theta(),
            heart_window_s: 10.0,
            extractors: ExtractorRegistry::BUILTINS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// Fixations that landed on one symbol.
#[derive(Debug, Clone)]
pub struct SymbolGroup<'a> {
    pub symbol_id: &'a str,
    pub hits: Vec<&'a SymbolHit>,
}

impl SymbolGroup<'_> {
    /// Windows this symbol's hits attached for `source_id`.
    pub fn windows<'b>(&'b self, source_id: &'b str) -> impl Iterator<Item = &'b PhysioWindow> + 'b {
        self.hits
            .iter()
            .flat_map(|h| &h.windows)
            .filter(move |w| w.source_id == source_id)
    }
}

pub struct MetricContext<'a> {
    pub session: &'a SessionData,
    /// Receiver-time interval of the baseline recording, if one took place.
    pub baseline: Option<(f64, f64)>,
    pub params: &'a MetricParams,
}

pub trait MetricExtractor: Send + Sync {
    fn name(&self) -> &str;
    fn modality(&self) -> Modality;
    /// Fills this extractor's columns. `rows[i]` belongs to `groups[i]`.
    fn fill(
        &self,
        stream: &StreamData,
        groups: &[SymbolGroup<'_>],
        ctx: &MetricContext<'_>,
        rows: &mut [MetricRow],
    ) -> Result<(), PhysioError>;
}

fn column(stream: &StreamData, idx: usize, range: std::ops::Range<usize>) -> Vec<f64> {
    stream.channels[idx][range].iter().map(|&v| v as f64).collect()
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// SCR count and mean rise time; events are detected once per stream and
/// counted when their onset lies in any of the symbol's windows.
struct ScrExtractor;

impl MetricExtractor for ScrExtractor {
    fn name(&self) -> &str {
        "eda-scr"
    }

    fn modality(&self) -> Modality {
        Modality::Eda
    }

    fn fill(&self, stream: &StreamData, groups: &[SymbolGroup<'_>], ctx: &MetricContext<'_>, rows: &mut [MetricRow]) -> Result<(), PhysioError> {
        let x = column(stream, 0, 0..stream.len());
        let events = detect_scrs(&x, stream.info.nominal_rate, ctx.params.scr_min_amplitude_us)?;
        let onset_time = |e: &ScrEvent| stream.timestamps[e.onset_index];
        for (g, row) in groups.iter().zip(rows) {
            let windows: Vec<_> = g.windows(&stream.info.source_id).collect();
            let inside: Vec<&ScrEvent> = events
                .iter()
                .filter(|e| {
                    let t = onset_time(e);
                    windows.iter().any(|w| t >= w.start && t <= w.end)
                })
                .collect();
            row.scr_count = Some(inside.len() as u32);
            row.scr_mean_rise_s = mean(&inside.iter().map(|e| e.rise_time).collect::<Vec<_>>());
        }
        Ok(())
    }
}

/// Alpha and theta power averaged over channels, then over windows. Windows
/// shorter than one Welch segment are widened symmetrically to fit one.
struct EegBandsExtractor;

impl MetricExtractor for EegBandsExtractor {
    fn name(&self) -> &str {
        "eeg-bands"
    }

    fn modality(&self) -> Modality {
        Modality::Eeg
    }

    fn fill(&self, stream: &StreamData, groups: &[SymbolGroup<'_>], ctx: &MetricContext<'_>, rows: &mut [MetricRow]) -> Result<(), PhysioError> {
        let p = ctx.params;
        let rate = stream.info.nominal_rate;
        for band in [&p.alpha, &p.theta] {
            if band.high > rate / 2.0 {
                return Err(PhysioError::AboveNyquist { high: band.high, nyquist: rate / 2.0 });
            }
        }
        let min_half = p.welch.segment_s / 2.0 + 1.0 / rate;
        for (g, row) in groups.iter().zip(rows) {
            let (mut alphas, mut thetas) = (Vec::new(), Vec::new());
            for w in g.windows(&stream.info.source_id) {
                let centre = (w.start + w.end) / 2.0;
                let half = ((w.end - w.start) / 2.0).max(min_half);
                let range = stream.range(centre - half, centre + half);
                let (mut a, mut t) = (0.0, 0.0);
                let mut ok = true;
                for ch in 0..stream.channels.len() {
                    match welch(&column(stream, ch, range.clone()), rate, &p.welch) {
                        Ok(psd) => {
                            a += psd.integrate(p.alpha.low, p.alpha.high);
                            t += psd.integrate(p.theta.low, p.theta.high);
                        }
                        // recording edges
                        Err(PhysioError::TooShort { .. }) => {
                            ok = false;
                            break;
                        }
                        Err(e) => return Err(e),
                    }
                }
                if ok {
                    let n = stream.channels.len() as f64;
                    alphas.push(a / n);
                    thetas.push(t / n);
                }
            }
            row.alpha_power = mean(&alphas);
            row.theta_power = mean(&thetas);
        }
        Ok(())
    }
}

/// Heart rate over a window centred on each fixation; unreliable estimates
/// are dropped before averaging.
struct HeartExtractor;

impl MetricExtractor for HeartExtractor {
    fn name(&self) -> &str {
        "ppg-heart"
    }

    fn modality(&self) -> Modality {
        Modality::Ppg
    }

    fn fill(&self, stream: &StreamData, groups: &[SymbolGroup<'_>], ctx: &MetricContext<'_>, rows: &mut [MetricRow]) -> Result<(), PhysioError> {
        let half = ctx.params.heart_window_s / 2.0;
        for (g, row) in groups.iter().zip(rows) {
            let mut bpms = Vec::new();
            for h in &g.hits {
                let centre = h.fixation.start + h.fixation.duration / 2.0;
                let x = column(stream, 0, stream.range(centre - half, centre + half));
                match heart_rate(&x, stream.info.nominal_rate) {
                    Ok(hr) if hr.reliable => bpms.push(hr.bpm),
                    Ok(_) | Err(PhysioError::TooShort { .. } | PhysioError::TooFewBeats(_)) => {}
                    Err(e) => return Err(e),
                }
            }
            row.heart_rate_bpm = mean(&bpms);
        }
        Ok(())
    }
}

/// Mean skin temperature over all samples in the symbol's windows.
struct TemperatureExtractor;

impl MetricExtractor for TemperatureExtractor {
    fn name(&self) -> &str {
        "temperature"
    }

    fn modality(&self) -> Modality {
        Modality::Temperature
    }

    fn fill(&self, stream: &StreamData, groups: &[SymbolGroup<'_>], _ctx: &MetricContext<'_>, rows: &mut [MetricRow]) -> Result<(), PhysioError> {
        for (g, row) in groups.iter().zip(rows) {
            let values: Vec<f64> = g
                .windows(&stream.info.source_id)
                .flat_map(|w| column(stream, 0, w.range.clone()))
                .collect();
            row.temp_c = mean(&values);
        }
        Ok(())
    }
}

/// Pupil diameter during the symbol's fixations against the baseline
/// interval. Per sample the finite, positive eyes are averaged.
struct PupilExtractor;

impl PupilExtractor {
    fn diameters(stream: &StreamData, range: std::ops::Range<usize>) -> Vec<f64> {
        let eyes: Vec<&[f32]> = ["pupil_left", "pupil_right"]
            .iter()
            .filter_map(|l| stream.channel(l))
            .collect();
        range
            .filter_map(|i| {
                let v: Vec<f64> = eyes
                    .iter()
                    .map(|c| c[i] as f64)
                    .filter(|d| d.is_finite() && *d > 0.0)
                    .collect();
                mean(&v)
            })
            .collect()
    }
}

impl MetricExtractor for PupilExtractor {
    fn name(&self) -> &str {
        "gaze-pupil"
    }

    fn modality(&self) -> Modality {
        Modality::Gaze
    }

    fn fill(&self, stream: &StreamData, groups: &[SymbolGroup<'_>], ctx: &MetricContext<'_>, rows: &mut [MetricRow]) -> Result<(), PhysioError> {
        let Some((b0, b1)) = ctx.baseline else {
            return Ok(());
        };
        let baseline = Self::diameters(stream, stream.range(b0, b1));
        if baseline.is_empty() {
            log::warn!("no pupil samples in baseline {b0}..{b1}; pupil metric omitted");
            return Ok(());
        }
        for (g, row) in groups.iter().zip(rows) {
            let series: Vec<f64> = g
                .hits
                .iter()
                .flat_map(|h| Self::diameters(stream, stream.range(h.fixation.start, h.fixation.end())))
                .collect();
            row.pupil_dilation_pct = match pupil_dilation_pct(&series, &baseline) {
                Ok(v) => Some(v),
                Err(PhysioError::EmptySeries) => None,
                Err(e) => return Err(e),
            };
        }
        Ok(())
    }
}

/// Extractors registered by name.
#[derive(Clone, Default)]
pub struct ExtractorRegistry {
    entries: IndexMap<String, Arc<dyn MetricExtractor>>,
}

impl ExtractorRegistry {
    pub const BUILTINS: [&'static str; 5] = ["eda-scr", "eeg-bands", "ppg-heart", "temperature", "gaze-pupil"];

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(ScrExtractor));
        r.register(Arc::new(EegBandsExtractor));
        r.register(Arc::new(HeartExtractor));
        r.register(Arc::new(TemperatureExtractor));
        r.register(Arc::new(PupilExtractor));
        r
    }

    /// Replaces any extractor already registered under the same name.
    pub fn register(&mut self, extractor: Arc<dyn MetricExtractor>) {
        self.entries.insert(extractor.name().to_string(), extractor);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn get(&self, name: &str) -> Result<&Arc<dyn MetricExtractor>, PhysioError> {
        self.entries
            .get(name)
            .ok_or_else(|| PhysioError::UnknownExtractor(name.to_string()))
    }
}

/// One row per symbol with at least one mapped fixation. Each configured
/// extractor runs on the first stream of its modality; a missing stream
/// leaves its columns empty.
pub fn build_metric_table(
    hits: &[SymbolHit],
    ctx: &MetricContext<'_>,
    registry: &ExtractorRegistry,
) -> Result<MetricTable, PhysioError> {
    let mut by_symbol: BTreeMap<&str, Vec<&SymbolHit>> = BTreeMap::new();
    for h in hits {
        if let Some(id) = &h.symbol_id {
            by_symbol.entry(id).or_default().push(h);
        }
    }
    let groups: Vec<SymbolGroup<'_>> = by_symbol
        .into_iter()
        .map(|(symbol_id, hits)| SymbolGroup { symbol_id, hits })
        .filter(|g| g.hits.iter().map(|h| h.fixation.duration).sum::<f64>() > 0.0)
        .collect();
    let mut rows: Vec<MetricRow> = groups
        .iter()
        .map(|g| MetricRow {
            symbol_id: g.symbol_id.to_string(),
            file: g.hits[0].file.clone().unwrap_or_default(),
            gaze_duration_ms: 1000.0 * g.hits.iter().map(|h| h.fixation.duration).sum::<f64>(),
            ..MetricRow::default()
        })
        .collect();
    for name in &ctx.params.extractors {
        let extractor = registry.get(name)?;
        let Some(stream) = ctx.session.streams_of(extractor.modality()).find(|s| !s.is_empty()) else {
            log::info!("no {} stream; {name} skipped", extractor.modality().as_str());
            continue;
        };
        extractor.fill(stream, &groups, ctx, &mut rows)?;
    }
    Ok(MetricTable::from_rows(rows))
}
