//! Deterministic simulated devices.
//!
//! Every generator is registered by name in a [`SourceRegistry`] and selected
//! through [`DeviceProfile::generator`] (defaulting to the modality name).
//! Identical profile and seed produce identical sample sequences.

use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{Modality, Sample, StreamError, StreamInfo};

/// Configuration for one simulated device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceProfile {
    pub source_id: String,
    pub name: String,
    pub modality: Modality,
    /// Registry key; defaults to the modality name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    pub nominal_rate: f64,
    pub channel_labels: Vec<String>,
    #[serde(default)]
    pub seed: u64,
    /// How far the device clock runs ahead of true time, seconds.
    #[serde(default)]
    pub clock_offset_s: f64,
    #[serde(default)]
    pub drift_ppm: f64,
    /// Generator-specific parameters.
    #[serde(default)]
    pub params: toml::Table,
}

impl DeviceProfile {
    pub fn generator_name(&self) -> &str {
        self.generator.as_deref().unwrap_or(self.modality.as_str())
    }

    pub fn stream_info(&self) -> Result<StreamInfo, StreamError> {
        StreamInfo::new(
            self.name.clone(),
            self.modality,
            self.nominal_rate,
            self.channel_labels.clone(),
            self.source_id.clone(),
        )
    }

    fn invalid(&self, reason: impl Into<String>) -> StreamError {
        StreamError::InvalidProfile {
            source_id: self.source_id.clone(),
            reason: reason.into(),
        }
    }

    fn params<P: DeserializeOwned>(&self) -> Result<P, StreamError> {
        toml::Value::Table(self.params.clone())
            .try_into()
            .map_err(|e: toml::de::Error| self.invalid(e.to_string()))
    }
}

/// Produces the samples of one device, in device-relative seconds.
pub trait SignalSource: Send {
    /// Appends every not-yet-emitted sample with time strictly below `until`.
    fn poll(&mut self, until: f64, out: &mut Vec<Sample>);
}

/// A continuous signal evaluated at a fixed cadence.
pub trait Waveform: Send {
    fn fill(&mut self, t: f64, values: &mut [f32]);
}

/// Source of pointer positions for mouse-as-gaze mode.
pub trait PointerSource: Send {
    fn position(&mut self, t: f64) -> (f64, f64);
}

struct Cadenced<W> {
    waveform: W,
    rate: f64,
    channels: usize,
    next_index: u64,
}

impl<W: Waveform> SignalSource for Cadenced<W> {
    fn poll(&mut self, until: f64, out: &mut Vec<Sample>) {
        loop {
            let t = self.next_index as f64 / self.rate;
            if t >= until {
                break;
            }
            let mut values = vec![0f32; self.channels];
            self.waveform.fill(t, &mut values);
            out.push(Sample::new(t, values));
            self.next_index += 1;
        }
    }
}

fn cadenced<W: Waveform + 'static>(
    profile: &DeviceProfile,
    waveform: W,
) -> Result<Box<dyn SignalSource>, StreamError> {
    if !(profile.nominal_rate > 0.0 && profile.nominal_rate.is_finite()) {
        return Err(profile.invalid("regular streams need a positive nominal_rate"));
    }
    Ok(Box::new(Cadenced {
        waveform,
        rate: profile.nominal_rate,
        channels: profile.channel_labels.len(),
        next_index: 0,
    }))
}

pub type SourceFactory = fn(&DeviceProfile) -> Result<Box<dyn SignalSource>, StreamError>;

/// Named signal generators.
#[derive(Clone, Default)]
pub struct SourceRegistry {
    factories: BTreeMap<String, SourceFactory>,
}

impl SourceRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register("gaze", gaze_scripted);
        r.register("gaze-pointer", gaze_pointer);
        r.register("eeg", eeg);
        r.register("eda", eda);
        r.register("ppg", ppg);
        r.register("temperature", temperature);
        r.register("marker", marker);
        r
    }

    pub fn register(&mut self, name: impl Into<String>, factory: SourceFactory) {
        self.factories.insert(name.into(), factory);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn create(&self, profile: &DeviceProfile) -> Result<Box<dyn SignalSource>, StreamError> {
        profile.stream_info()?;
        let name = profile.generator_name();
        let factory = self
            .factories
            .get(name)
            .ok_or_else(|| StreamError::UnsupportedGenerator(name.to_string()))?;
        factory(profile)
    }
}

/// A device instance: stream identity plus its sample source, with
/// timestamps shifted onto the device clock by `origin`.
pub struct Simulator {
    info: StreamInfo,
    source: Box<dyn SignalSource>,
    origin: f64,
    emitted_until: f64,
}

impl Simulator {
    pub fn new(registry: &SourceRegistry, profile: &DeviceProfile) -> Result<Self, StreamError> {
        Ok(Simulator {
            info: profile.stream_info()?,
            source: registry.create(profile)?,
            origin: 0.0,
            emitted_until: 0.0,
        })
    }

    /// Mouse-as-gaze: a gaze stream whose coordinates come from `pointer`.
    pub fn from_pointer(
        profile: &DeviceProfile,
        pointer: Box<dyn PointerSource>,
    ) -> Result<Self, StreamError> {
        let params: GazeParams = profile.params()?;
        check_modality(profile, Modality::Gaze, Some(4))?;
        let waveform = PointerGaze {
            pointer,
            pupil: PupilModel::new(profile.seed, &params),
        };
        Ok(Simulator {
            info: profile.stream_info()?,
            source: cadenced(profile, waveform)?,
            origin: 0.0,
            emitted_until: 0.0,
        })
    }

    pub fn with_origin(mut self, origin: f64) -> Self {
        self.origin = origin;
        self
    }

    pub fn info(&self) -> &StreamInfo {
        &self.info
    }

    /// Samples with device-relative time in `[previous until, until)`,
    /// stamped as `origin + t`.
    pub fn poll(&mut self, until: f64) -> Vec<Sample> {
        let mut out = Vec::new();
        self.source.poll(until, &mut out);
        self.emitted_until = self.emitted_until.max(until);
        for s in &mut out {
            s.timestamp += self.origin;
        }
        out
    }

    pub fn emitted_until(&self) -> f64 {
        self.emitted_until
    }
}

/// Generates `duration` seconds of a device's output from time 0.
pub fn run_simulator(profile: &DeviceProfile, duration: f64) -> Result<Vec<Sample>, StreamError> {
    Ok(Simulator::new(&SourceRegistry::with_builtins(), profile)?.poll(duration))
}

pub const EPOC_CHANNELS: [&str; 14] = [
    "AF3", "F7", "F3", "FC5", "T7", "P7", "O1", "O2", "P8", "T8", "FC6", "F4", "F8", "AF4",
];

/// The default sensor set: gaze 60 Hz × 4, EEG 128 Hz × 14, EDA 128 Hz,
/// PPG 64 Hz, skin temperature 4 Hz.
pub fn default_device_set(seed: u64) -> Vec<DeviceProfile> {
    let labels = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let profile = |i: u64, id: &str, name: &str, modality, rate, ch: Vec<String>| DeviceProfile {
        source_id: id.to_string(),
        name: name.to_string(),
        modality,
        generator: None,
        nominal_rate: rate,
        channel_labels: ch,
        seed: seed.wrapping_add(i),
        clock_offset_s: 0.0,
        drift_ppm: 0.0,
        params: toml::Table::new(),
    };
    vec![
        profile(0, "gaze", "Eye tracker", Modality::Gaze, 60.0,
            labels(&["x", "y", "pupil_left", "pupil_right"])),
        profile(1, "eeg", "EEG headset", Modality::Eeg, 128.0, labels(&EPOC_CHANNELS)),
        profile(2, "eda", "EDA sensor", Modality::Eda, 128.0, labels(&["gsr"])),
        profile(3, "ppg", "PPG sensor", Modality::Ppg, 64.0, labels(&["ppg"])),
        profile(4, "temperature", "Skin temperature", Modality::Temperature, 4.0,
            labels(&["skin_temp"])),
    ]
}

fn check_modality(
    profile: &DeviceProfile,
    modality: Modality,
    channels: Option<usize>,
) -> Result<(), StreamError> {
    if profile.modality != modality {
        return Err(profile.invalid(format!(
            "generator {} produces {modality} data, profile says {}",
            profile.generator_name(),
            profile.modality
        )));
    }
    if let Some(n) = channels {
        if profile.channel_labels.len() != n {
            return Err(profile.invalid(format!(
                "{modality} generator emits {n} channels, profile lists {}",
                profile.channel_labels.len()
            )));
        }
    }
    Ok(())
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

// ---------------------------------------------------------------- gaze

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
struct GazeParams {
    dwells: Vec<DwellTarget>,
    jitter_px: f64,
    pupil_mm: f64,
    pupil_noise_mm: f64,
    /// Area random dwells are drawn from: x, y, width, height.
    screen: [f64; 4],
    random_dwell_s: [f64; 2],
    path: Vec<[f64; 3]>,
}

impl Default for GazeParams {
    fn default() -> Self {
        GazeParams {
            dwells: Vec::new(),
            jitter_px: 3.0,
            pupil_mm: 3.5,
            pupil_noise_mm: 0.03,
            screen: [0.0, 0.0, 1920.0, 1080.0],
            random_dwell_s: [0.2, 1.2],
            path: Vec::new(),
        }
    }
}

/// Gaze rests inside `[x, x+w] × [y, y+h]` for `duration_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DwellTarget {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub duration_s: f64,
}

impl DwellTarget {
    fn place(&self, rng: &mut ChaCha8Rng, jitter: f64) -> (f64, f64) {
        let cx = self.x + self.w / 2.0 + jitter * gauss(rng);
        let cy = self.y + self.h / 2.0 + jitter * gauss(rng);
        (cx.clamp(self.x, self.x + self.w), cy.clamp(self.y, self.y + self.h))
    }
}

struct PupilModel {
    rng: ChaCha8Rng,
    base: f64,
    noise: f64,
}

impl PupilModel {
    fn new(seed: u64, p: &GazeParams) -> Self {
        PupilModel {
            rng: ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15),
            base: p.pupil_mm,
            noise: p.pupil_noise_mm,
        }
    }

    fn fill(&mut self, t: f64, out: &mut [f32]) {
        let slow = 0.1 * (TAU * t / 30.0).sin();
        let left = self.base + slow + self.noise * gauss(&mut self.rng);
        let right = self.base + slow + self.noise * gauss(&mut self.rng);
        out[2] = left as f32;
        out[3] = right as f32;
    }
}

struct ScriptedGaze {
    rng: ChaCha8Rng,
    jitter: f64,
    script: Vec<DwellTarget>,
    cycle: f64,
    pupil: PupilModel,
}

impl Waveform for ScriptedGaze {
    fn fill(&mut self, t: f64, out: &mut [f32]) {
        let mut local = t % self.cycle;
        let mut target = self.script[self.script.len() - 1];
        for d in &self.script {
            if local < d.duration_s {
                target = *d;
                break;
            }
            local -= d.duration_s;
        }
        let (x, y) = target.place(&mut self.rng, self.jitter);
        out[0] = x as f32;
        out[1] = y as f32;
        self.pupil.fill(t, out);
    }
}

struct RandomGaze {
    rng: ChaCha8Rng,
    jitter: f64,
    screen: [f64; 4],
    dwell_range: [f64; 2],
    current: DwellTarget,
    current_end: f64,
    pupil: PupilModel,
}

impl RandomGaze {
    fn next_target(&mut self) {
        let [sx, sy, sw, sh] = self.screen;
        let duration = self.rng.random_range(self.dwell_range[0]..=self.dwell_range[1]);
        self.current = DwellTarget {
            x: sx + self.rng.random_range(0.0..sw),
            y: sy + self.rng.random_range(0.0..sh),
            w: 0.0,
            h: 0.0,
            duration_s: duration,
        };
        self.current_end += duration;
    }
}

impl Waveform for RandomGaze {
    fn fill(&mut self, t: f64, out: &mut [f32]) {
        while t >= self.current_end {
            self.next_target();
        }
        let [sx, sy, sw, sh] = self.screen;
        let x = (self.current.x + self.jitter * gauss(&mut self.rng)).clamp(sx, sx + sw);
        let y = (self.current.y + self.jitter * gauss(&mut self.rng)).clamp(sy, sy + sh);
        out[0] = x as f32;
        out[1] = y as f32;
        self.pupil.fill(t, out);
    }
}

fn gaze_scripted(profile: &DeviceProfile) -> Result<Box<dyn SignalSource>, StreamError> {
    check_modality(profile, Modality::Gaze, Some(4))?;
    let p: GazeParams = profile.params()?;
    let rng = ChaCha8Rng::seed_from_u64(profile.seed);
    let pupil = PupilModel::new(profile.seed, &p);
    if p.dwells.is_empty() {
        let [_, _, w, h] = p.screen;
        if !(w > 0.0 && h > 0.0) || !(p.random_dwell_s[0] > 0.0 && p.random_dwell_s[0] <= p.random_dwell_s[1]) {
            return Err(profile.invalid("random gaze needs a non-empty screen and dwell range"));
        }
        return cadenced(
            profile,
            RandomGaze {
                rng,
                jitter: p.jitter_px,
                screen: p.screen,
                dwell_range: p.random_dwell_s,
                current: DwellTarget { x: 0.0, y: 0.0, w: 0.0, h: 0.0, duration_s: 0.0 },
                current_end: 0.0,
                pupil,
            },
        );
    }
    if p.dwells.iter().any(|d| !(d.duration_s > 0.0) || d.w < 0.0 || d.h < 0.0) {
        return Err(profile.invalid("dwell targets need positive duration and non-negative size"));
    }
    let cycle = p.dwells.iter().map(|d| d.duration_s).sum();
    cadenced(
        profile,
        ScriptedGaze {
            rng,
            jitter: p.jitter_px,
            script: p.dwells,
            cycle,
            pupil,
        },
    )
}

/// Piecewise-linear pointer path through `(t, x, y)` waypoints, holding the
/// last position afterwards.
pub struct ScriptedPointer {
    waypoints: Vec<[f64; 3]>,
}

impl ScriptedPointer {
    pub fn new(mut waypoints: Vec<[f64; 3]>) -> Self {
        waypoints.sort_by(|a, b| a[0].total_cmp(&b[0]));
        ScriptedPointer { waypoints }
    }
}

impl PointerSource for ScriptedPointer {
    fn position(&mut self, t: f64) -> (f64, f64) {
        let w = &self.waypoints;
        let Some(first) = w.first() else {
            return (0.0, 0.0);
        };
        if t <= first[0] {
            return (first[1], first[2]);
        }
        let i = w.partition_point(|p| p[0] <= t);
        if i >= w.len() {
            let last = w[w.len() - 1];
            return (last[1], last[2]);
        }
        let (a, b) = (w[i - 1], w[i]);
        let u = (t - a[0]) / (b[0] - a[0]);
        (a[1] + u * (b[1] - a[1]), a[2] + u * (b[2] - a[2]))
    }
}

struct PointerGaze {
    pointer: Box<dyn PointerSource>,
    pupil: PupilModel,
}

impl Waveform for PointerGaze {
    fn fill(&mut self, t: f64, out: &mut [f32]) {
        let (x, y) = self.pointer.position(t);
        out[0] = x as f32;
        out[1] = y as f32;
        self.pupil.fill(t, out);
    }
}

fn gaze_pointer(profile: &DeviceProfile) -> Result<Box<dyn SignalSource>, StreamError> {
    check_modality(profile, Modality::Gaze, Some(4))?;
    let p: GazeParams = profile.params()?;
    if p.path.is_empty() {
        return Err(profile.invalid("gaze-pointer needs a `path` of [t, x, y] waypoints"));
    }
    let pupil = PupilModel::new(profile.seed, &p);
    cadenced(
        profile,
        PointerGaze {
            pointer: Box::new(ScriptedPointer::new(p.path)),
            pupil,
        },
    )
}

// ---------------------------------------------------------------- eeg

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
struct EegParams {
    alpha_uv: f64,
    alpha_hz: f64,
    theta_uv: f64,
    theta_hz: f64,
    noise_uv: f64,
}

impl Default for EegParams {
    fn default() -> Self {
        EegParams {
            alpha_uv: 10.0,
            alpha_hz: 10.0,
            theta_uv: 6.0,
            theta_hz: 6.0,
            noise_uv: 4.0,
        }
    }
}

struct Eeg {
    rng: ChaCha8Rng,
    p: EegParams,
    phases: Vec<[f64; 4]>,
}

impl Waveform for Eeg {
    fn fill(&mut self, t: f64, out: &mut [f32]) {
        for (c, v) in out.iter_mut().enumerate() {
            let [pa, pt, ma, mt] = self.phases[c];
            let alpha_env = 1.0 + 0.3 * (TAU * 0.1 * t + ma).sin();
            let theta_env = 1.0 + 0.3 * (TAU * 0.07 * t + mt).sin();
            let x = self.p.alpha_uv * alpha_env * (TAU * self.p.alpha_hz * t + pa).sin()
                + self.p.theta_uv * theta_env * (TAU * self.p.theta_hz * t + pt).sin()
                + self.p.noise_uv * gauss(&mut self.rng);
            *v = x as f32;
        }
    }
}

fn eeg(profile: &DeviceProfile) -> Result<Box<dyn SignalSource>, StreamError> {
    check_modality(profile, Modality::Eeg, None)?;
    let p: EegParams = profile.params()?;
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
    let phases = (0..profile.channel_labels.len())
        .map(|_| std::array::from_fn(|_| rng.random_range(0.0..TAU)))
        .collect();
    cadenced(profile, Eeg { rng, p, phases })
}

// ---------------------------------------------------------------- eda

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
struct EdaParams {
    tonic_us: f64,
    tonic_drift_us_per_min: f64,
    scr_per_min: f64,
    amplitude_us: [f64; 2],
    rise_s: [f64; 2],
    decay_s: f64,
    noise_us: f64,
}

impl Default for EdaParams {
    fn default() -> Self {
        EdaParams {
            tonic_us: 2.0,
            tonic_drift_us_per_min: 0.02,
            scr_per_min: 4.0,
            amplitude_us: [0.05, 0.4],
            rise_s: [0.8, 2.0],
            decay_s: 3.0,
            noise_us: 0.002,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Response {
    onset: f64,
    amplitude: f64,
    rise: f64,
}

/// Half-cosine rise to the peak followed by exponential recovery.
fn scr_shape(r: &Response, decay: f64, t: f64) -> f64 {
    let dt = t - r.onset;
    if dt <= 0.0 {
        0.0
    } else if dt < r.rise {
        r.amplitude * (1.0 - (std::f64::consts::PI * dt / r.rise).cos()) / 2.0
    } else {
        r.amplitude * (-(dt - r.rise) / decay).exp()
    }
}

struct Eda {
    rng: ChaCha8Rng,
    p: EdaParams,
    gap: Option<Exp<f64>>,
    next_onset: f64,
    active: VecDeque<Response>,
}

impl Waveform for Eda {
    fn fill(&mut self, t: f64, out: &mut [f32]) {
        if let Some(gap) = self.gap {
            while self.next_onset <= t {
                let rise = self.rng.random_range(self.p.rise_s[0]..=self.p.rise_s[1]);
                let amplitude = self
                    .rng
                    .random_range(self.p.amplitude_us[0]..=self.p.amplitude_us[1]);
                self.active.push_back(Response {
                    onset: self.next_onset,
                    amplitude,
                    rise,
                });
                // keep responses separable: no new onset before this one peaks
                self.next_onset += rise + 1.0 + gap.sample(&mut self.rng);
            }
        }
        while self
            .active
            .front()
            .is_some_and(|r| t - r.onset - r.rise > 12.0 * self.p.decay_s)
        {
            self.active.pop_front();
        }
        let phasic: f64 = self
            .active
            .iter()
            .map(|r| scr_shape(r, self.p.decay_s, t))
            .sum();
        let v = self.p.tonic_us
            + self.p.tonic_drift_us_per_min * t / 60.0
            + phasic
            + self.p.noise_us * gauss(&mut self.rng);
        out[0] = v as f32;
    }
}

fn eda(profile: &DeviceProfile) -> Result<Box<dyn SignalSource>, StreamError> {
    check_modality(profile, Modality::Eda, Some(1))?;
    let p: EdaParams = profile.params()?;
    if !(p.decay_s > 0.0)
        || !(p.rise_s[0] > 0.0 && p.rise_s[0] <= p.rise_s[1])
        || !(p.amplitude_us[0] >= 0.0 && p.amplitude_us[0] <= p.amplitude_us[1])
    {
        return Err(profile.invalid("EDA response ranges must be positive and ordered"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
    let gap = (p.scr_per_min > 0.0)
        .then(|| Exp::new(p.scr_per_min / 60.0).expect("positive rate"));
    let next_onset = gap.map_or(f64::INFINITY, |g| g.sample(&mut rng));
    cadenced(
        profile,
        Eda {
            rng,
            p,
            gap,
            next_onset,
            active: VecDeque::new(),
        },
    )
}

// ---------------------------------------------------------------- ppg

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
struct PpgParams {
    heart_rate_bpm: f64,
    ibi_sd_s: f64,
    amplitude: f64,
    noise: f64,
}

impl Default for PpgParams {
    fn default() -> Self {
        PpgParams {
            heart_rate_bpm: 70.0,
            ibi_sd_s: 0.03,
            amplitude: 1.0,
            noise: 0.02,
        }
    }
}

struct Ppg {
    rng: ChaCha8Rng,
    p: PpgParams,
    beats: VecDeque<f64>,
    next_beat: f64,
}

impl Waveform for Ppg {
    fn fill(&mut self, t: f64, out: &mut [f32]) {
        let mean_ibi = 60.0 / self.p.heart_rate_bpm;
        while self.next_beat <= t + 1.0 {
            self.beats.push_back(self.next_beat);
            let ibi = (mean_ibi + self.p.ibi_sd_s * gauss(&mut self.rng)).max(0.3 * mean_ibi);
            self.next_beat += ibi;
        }
        while self.beats.front().is_some_and(|&b| t - b > 1.5) {
            self.beats.pop_front();
        }
        let pulse: f64 = self
            .beats
            .iter()
            .map(|&b| {
                let systolic = (-((t - b) / 0.08).powi(2) / 2.0).exp();
                let dicrotic = 0.3 * (-((t - b - 0.3) / 0.1).powi(2) / 2.0).exp();
                systolic + dicrotic
            })
            .sum();
        out[0] = (self.p.amplitude * pulse + self.p.noise * gauss(&mut self.rng)) as f32;
    }
}

fn ppg(profile: &DeviceProfile) -> Result<Box<dyn SignalSource>, StreamError> {
    check_modality(profile, Modality::Ppg, Some(1))?;
    let p: PpgParams = profile.params()?;
    if !(p.heart_rate_bpm > 0.0) {
        return Err(profile.invalid("heart_rate_bpm must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
    let next_beat = rng.random_range(0.0..60.0 / p.heart_rate_bpm);
    cadenced(
        profile,
        Ppg {
            rng,
            p,
            beats: VecDeque::new(),
            next_beat,
        },
    )
}

// ---------------------------------------------------------------- temperature

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
struct TemperatureParams {
    base_c: f64,
    drift_c_per_min: f64,
    noise_c: f64,
}

impl Default for TemperatureParams {
    fn default() -> Self {
        TemperatureParams {
            base_c: 33.5,
            drift_c_per_min: 0.01,
            noise_c: 0.005,
        }
    }
}

struct Temperature {
    rng: ChaCha8Rng,
    p: TemperatureParams,
}

impl Waveform for Temperature {
    fn fill(&mut self, t: f64, out: &mut [f32]) {
        let v = self.p.base_c
            + self.p.drift_c_per_min * t / 60.0
            + 0.05 * (TAU * t / 120.0).sin()
            + self.p.noise_c * gauss(&mut self.rng);
        out[0] = v as f32;
    }
}

fn temperature(profile: &DeviceProfile) -> Result<Box<dyn SignalSource>, StreamError> {
    check_modality(profile, Modality::Temperature, Some(1))?;
    let p = profile.params()?;
    cadenced(
        profile,
        Temperature {
            rng: ChaCha8Rng::seed_from_u64(profile.seed),
            p,
        },
    )
}

// ---------------------------------------------------------------- markers

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default)]
struct MarkerParams {
    events: Vec<ScriptedMarker>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
struct ScriptedMarker {
    at_s: f64,
    code: f64,
}

struct Markers {
    events: Vec<ScriptedMarker>,
    next: usize,
}

impl SignalSource for Markers {
    fn poll(&mut self, until: f64, out: &mut Vec<Sample>) {
        while let Some(e) = self.events.get(self.next) {
            if e.at_s >= until {
                break;
            }
            out.push(Sample::new(e.at_s, vec![e.code as f32]));
            self.next += 1;
        }
    }
}

fn marker(profile: &DeviceProfile) -> Result<Box<dyn SignalSource>, StreamError> {
    check_modality(profile, Modality::Marker, Some(1))?;
    if profile.nominal_rate != 0.0 {
        return Err(profile.invalid("marker streams are irregular; nominal_rate must be 0"));
    }
    let mut p: MarkerParams = profile.params()?;
    p.events.sort_by(|a, b| a.at_s.total_cmp(&b.at_s));
    Ok(Box::new(Markers {
        events: p.events,
        next: 0,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn by_id(id: &str) -> DeviceProfile {
        default_device_set(7)
            .into_iter()
            .find(|p| p.source_id == id)
            .unwrap()
    }

    #[test]
    fn eda_count_and_determinism() {
        let p = by_id("eda");
        let a = run_simulator(&p, 10.0).unwrap();
        assert_eq!(a.len(), 1280);
        let b = run_simulator(&p, 10.0).unwrap();
        assert_eq!(a, b);
        let mut other = p.clone();
        other.seed += 1;
        assert_ne!(run_simulator(&other, 10.0).unwrap(), a);
    }

    #[test]
    fn sample_counts_match_rate_for_every_default_device() {
        for p in default_device_set(1) {
            let n = run_simulator(&p, 7.3).unwrap().len() as f64;
            assert!((n - p.nominal_rate * 7.3).abs() <= 1.0, "{} {n}", p.source_id);
        }
    }

    #[test]
    fn incremental_polling_matches_one_shot() {
        let p = by_id("ppg");
        let reg = SourceRegistry::with_builtins();
        let mut sim = Simulator::new(&reg, &p).unwrap();
        let mut inc = Vec::new();
        for k in 1..=40 {
            inc.extend(sim.poll(k as f64 * 0.25));
        }
        assert_eq!(inc, run_simulator(&p, 10.0).unwrap());
    }

    #[test]
    fn scripted_gaze_dwells_inside_targets() {
        let mut p = by_id("gaze");
        let params: toml::Table = toml::from_str(
            r#"
            jitter_px = 40.0
            [[dwells]]
            x = 100.0
            y = 100.0
            w = 50.0
            h = 20.0
            duration_s = 2.0
            [[dwells]]
            x = 600.0
            y = 400.0
            w = 80.0
            h = 16.0
            duration_s = 3.0
            "#,
        )
        .unwrap();
        p.params = params;
        let samples = run_simulator(&p, 5.0).unwrap();
        assert_eq!(samples.len(), 300);
        for s in &samples {
            let (x, y) = (s.values[0] as f64, s.values[1] as f64);
            if s.timestamp < 2.0 {
                assert!((100.0..=150.0).contains(&x) && (100.0..=120.0).contains(&y));
            } else {
                assert!((600.0..=680.0).contains(&x) && (400.0..=416.0).contains(&y));
            }
        }
    }

    #[test]
    fn marker_stream_emits_scripted_events_only() {
        let mut p = DeviceProfile {
            source_id: "markers".into(),
            name: "Markers".into(),
            modality: Modality::Marker,
            generator: None,
            nominal_rate: 0.0,
            channel_labels: vec!["code".into()],
            seed: 0,
            clock_offset_s: 0.0,
            drift_ppm: 0.0,
            params: toml::Table::new(),
        };
        p.params = toml::from_str(
            "events = [{at_s = 1.0, code = 1.0}, {at_s = 2.5, code = 2.0}, {at_s = 4.0, code = 3.0}]",
        )
        .unwrap();
        let s = run_simulator(&p, 60.0).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s[1], Sample::new(2.5, vec![2.0]));
    }

    #[test]
    fn pointer_mode_follows_path() {
        let mut p = by_id("gaze");
        p.generator = Some("gaze-pointer".into());
        p.params = toml::from_str("path = [[0.0, 0.0, 0.0], [1.0, 100.0, 50.0]]").unwrap();
        let s = run_simulator(&p, 2.0).unwrap();
        assert_eq!(s[30].values[0], 50.0);
        assert_eq!(s[30].values[1], 25.0);
        assert_eq!(s[119].values[0], 100.0);
    }

    #[test]
    fn unknown_generator_and_mismatched_modality() {
        let mut p = by_id("eda");
        p.generator = Some("ecg".into());
        assert!(matches!(
            run_simulator(&p, 1.0),
            Err(StreamError::UnsupportedGenerator(_))
        ));
        let mut p = by_id("eda");
        p.generator = Some("eeg".into());
        assert!(matches!(
            run_simulator(&p, 1.0),
            Err(StreamError::InvalidProfile { .. })
        ));
    }

    #[test]
    fn custom_generator_can_be_registered() {
        struct Constant;
        impl SignalSource for Constant {
            fn poll(&mut self, until: f64, out: &mut Vec<Sample>) {
                if until > 0.0 && out.is_empty() {
                    out.push(Sample::new(0.0, vec![42.0]));
                }
            }
        }
        let mut reg = SourceRegistry::with_builtins();
        reg.register("constant", |_| Ok(Box::new(Constant)));
        let mut p = by_id("temperature");
        p.generator = Some("constant".into());
        let mut sim = Simulator::new(&reg, &p).unwrap().with_origin(100.0);
        assert_eq!(sim.poll(1.0), vec![Sample::new(100.0, vec![42.0])]);
        assert!(reg.names().any(|n| n == "constant"));
    }
}
