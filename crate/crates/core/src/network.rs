//! Random sparse feedforward ReLU networks.
//!
//! A network is a realized list of `(W, b)` layers following the recurrence
//! `h = W z + b`, `z' = max(h, 0)`. Weights are drawn from a sparse mixture
//! spec, biases from a dense spec; everything is deterministic given the
//! `(seed, stream)` of the generator used to build it.

use std::io::{Read, Write};

use ndarray::{Array1, Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::rng::StreamRng;
use crate::trajectory::{GrowthProfile, Polyline, matrix_arc_length, matrix_segment_stats};

/// Architecture plus weight/bias laws. The first layer maps `input_dim` to
/// `width`; all later layers are `width × width`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub width: usize,
    pub depth: usize,
    pub input_dim: usize,
    pub weight_spec: DistributionSpec,
    pub bias_spec: DistributionSpec,
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.depth == 0 || self.input_dim == 0 {
            return Err(Error::Domain(
                "width, depth, and input_dim must all be at least 1".into(),
            ));
        }
        if self.bias_spec.alpha() != 1.0 {
            return Err(Error::Domain(
                "biases are never sparsified: bias alpha must be 1".into(),
            ));
        }
        Ok(())
    }
}

/// One realized layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// `width × fan_in` weight matrix.
    pub weights: Array2<f64>,
    pub biases: Array1<f64>,
}

/// A realized network with its configuration echo and the generator key
/// that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<Layer>,
    config: NetworkConfig,
    seed: u64,
    stream: u64,
}

/// Per-layer pre- and post-activation images of an input polyline.
#[derive(Debug, Clone)]
pub struct LayerTrace {
    pub pre: Vec<Polyline>,
    pub post: Vec<Polyline>,
}

/// Sample a network. Weight matrices receive `1/√fan-in` scaling when the
/// weight spec requests it; biases always sample at their stated scale.
pub fn build_network(config: &NetworkConfig, rng: &mut StreamRng) -> Result<Network> {
    config.validate()?;
    let seed = rng.seed();
    let stream = rng.stream();
    let mut layers = Vec::with_capacity(config.depth);
    for d in 0..config.depth {
        let fan_in = if d == 0 {
            config.input_dim
        } else {
            config.width
        };
        let weights = config.weight_spec.sample_matrix(config.width, fan_in, rng);
        let biases = config.bias_spec.sample_vector(config.width, rng);
        layers.push(Layer { weights, biases });
    }
    Ok(Network {
        layers,
        config: config.clone(),
        seed,
        stream,
    })
}

/// Indices of strictly positive entries — the active ReLU coordinates.
/// `h = 0` counts as inactive.
pub fn active_set(pre_activation: ArrayView1<'_, f64>) -> Vec<usize> {
    pre_activation
        .iter()
        .enumerate()
        .filter_map(|(i, &h)| (h > 0.0).then_some(i))
        .collect()
}

impl Network {
    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Exact fraction of weight entries equal to zero, over all layers.
    pub fn sparsity_fraction(&self) -> f64 {
        let mut zeros = 0usize;
        let mut total = 0usize;
        for layer in &self.layers {
            zeros += layer.weights.iter().filter(|&&w| w == 0.0).count();
            total += layer.weights.len();
        }
        zeros as f64 / total as f64
    }

    /// A copy with every weight multiplied by `c` (biases untouched).
    pub fn with_scaled_weights(&self, c: f64) -> Network {
        let layers = self
            .layers
            .iter()
            .map(|l| Layer {
                weights: &l.weights * c,
                biases: l.biases.clone(),
            })
            .collect();
        Network {
            layers,
            ..self.clone()
        }
    }

    /// One layer step on a `(n_points, fan_in)` point matrix.
    fn layer_step(&self, d: usize, points: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
        let layer = &self.layers[d];
        let mut pre = points.dot(&layer.weights.t());
        pre += &layer.biases.view().insert_axis(Axis(0));
        let post = pre.mapv(|h| h.max(0.0));
        (pre, post)
    }

    /// Propagate a full polyline, materializing every pre- and
    /// post-activation image.
    pub fn forward_trace(&self, input: &Polyline) -> Result<LayerTrace> {
        self.check_input_dim(input.dim())?;
        let mut pre_layers = Vec::with_capacity(self.depth());
        let mut post_layers = Vec::with_capacity(self.depth());
        let mut current = input.points().clone();
        for d in 0..self.depth() {
            let (pre, post) = self.layer_step(d, &current);
            current = post.clone();
            pre_layers.push(Polyline::new(pre)?);
            post_layers.push(Polyline::new(post)?);
        }
        Ok(LayerTrace {
            pre: pre_layers,
            post: post_layers,
        })
    }

    /// Propagate a single point; returns per-layer `(pre, post)` vectors.
    pub fn forward_point(
        &self,
        point: ArrayView1<'_, f64>,
    ) -> Result<Vec<(Array1<f64>, Array1<f64>)>> {
        self.check_input_dim(point.len())?;
        let mut out = Vec::with_capacity(self.depth());
        let mut current = point.to_owned();
        for layer in &self.layers {
            let pre = layer.weights.dot(&current) + &layer.biases;
            let post = pre.mapv(|h| h.max(0.0));
            current = post.clone();
            out.push((pre, post));
        }
        Ok(out)
    }

    /// Measure growth layer by layer without retaining the trace. Exactly
    /// the arithmetic of [`crate::trajectory::growth_profile`] applied to a
    /// materialized trace, but holding only two layers of points at a time.
    pub fn growth_profile(&self, input: &Polyline) -> Result<GrowthProfile> {
        self.check_input_dim(input.dim())?;
        let depth = self.depth();
        let mut profile = GrowthProfile {
            lengths: Vec::with_capacity(depth + 1),
            pre_lengths: Vec::with_capacity(depth),
            mean_ratios: Vec::with_capacity(depth),
            dead_fractions: Vec::with_capacity(depth),
            ratio_sums: Vec::with_capacity(depth),
            surviving_counts: Vec::with_capacity(depth),
        };
        let mut current = input.points().clone();
        profile.lengths.push(matrix_arc_length(&current.view()));
        for d in 0..depth {
            let (pre, post) = self.layer_step(d, &current);
            let stats = matrix_segment_stats(&current.view(), &post.view());
            profile.lengths.push(matrix_arc_length(&post.view()));
            profile.pre_lengths.push(matrix_arc_length(&pre.view()));
            profile.mean_ratios.push(stats.mean_ratio());
            profile.dead_fractions.push(stats.dead_fraction());
            profile.ratio_sums.push(stats.ratio_sum);
            profile.surviving_counts.push(stats.surviving);
            current = post;
        }
        Ok(profile)
    }

    fn check_input_dim(&self, dim: usize) -> Result<()> {
        if dim != self.config.input_dim {
            return Err(Error::Dimension(format!(
                "input dimension {} does not match network input_dim {}",
                dim, self.config.input_dim
            )));
        }
        Ok(())
    }
}

const DUMP_MAGIC: &[u8; 4] = b"SRNB";
const DUMP_VERSION: u32 = 1;

/// Write a realized network as a versioned binary dump: magic, version,
/// a JSON-encoded config echo, the generator key, then each layer's weight
/// matrix and bias vector as little-endian f64.
pub fn write_network<W: Write>(net: &Network, mut out: W) -> std::io::Result<()> {
    out.write_all(DUMP_MAGIC)?;
    out.write_all(&DUMP_VERSION.to_le_bytes())?;
    let config_json = serde_json::to_vec(net.config()).expect("config serializes");
    out.write_all(&(config_json.len() as u32).to_le_bytes())?;
    out.write_all(&config_json)?;
    out.write_all(&net.seed.to_le_bytes())?;
    out.write_all(&net.stream.to_le_bytes())?;
    out.write_all(&(net.layers.len() as u32).to_le_bytes())?;
    for layer in &net.layers {
        let (rows, cols) = layer.weights.dim();
        out.write_all(&(rows as u32).to_le_bytes())?;
        out.write_all(&(cols as u32).to_le_bytes())?;
        for w in layer.weights.iter() {
            out.write_all(&w.to_le_bytes())?;
        }
        for b in layer.biases.iter() {
            out.write_all(&b.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Read a network dump produced by [`write_network`].
pub fn read_network<R: Read>(mut input: R) -> Result<Network> {
    let bad = |msg: &str| Error::Config(format!("network dump: {msg}"));
    let mut magic = [0u8; 4];
    input
        .read_exact(&mut magic)
        .map_err(|_| bad("missing magic"))?;
    if &magic != DUMP_MAGIC {
        return Err(bad("wrong magic"));
    }
    let version = read_u32(&mut input).map_err(|_| bad("missing version"))?;
    if version != DUMP_VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let config_len = read_u32(&mut input).map_err(|_| bad("missing config length"))? as usize;
    let mut config_json = vec![0u8; config_len];
    input
        .read_exact(&mut config_json)
        .map_err(|_| bad("truncated config"))?;
    let config: NetworkConfig =
        serde_json::from_slice(&config_json).map_err(|e| bad(&format!("config: {e}")))?;
    let seed = read_u64(&mut input).map_err(|_| bad("missing seed"))?;
    let stream = read_u64(&mut input).map_err(|_| bad("missing stream"))?;
    let n_layers = read_u32(&mut input).map_err(|_| bad("missing layer count"))? as usize;
    let mut layers = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        let rows = read_u32(&mut input).map_err(|_| bad("truncated layer header"))? as usize;
        let cols = read_u32(&mut input).map_err(|_| bad("truncated layer header"))? as usize;
        let mut weights = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            weights.push(read_f64(&mut input).map_err(|_| bad("truncated weights"))?);
        }
        let mut biases = Vec::with_capacity(rows);
        for _ in 0..rows {
            biases.push(read_f64(&mut input).map_err(|_| bad("truncated biases"))?);
        }
        layers.push(Layer {
            weights: Array2::from_shape_vec((rows, cols), weights)
                .map_err(|e| bad(&e.to_string()))?,
            biases: Array1::from_vec(biases),
        });
    }
    Ok(Network {
        layers,
        config,
        seed,
        stream,
    })
}

fn read_u32<R: Read>(r: &mut R) -> std::io::Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64<R: Read>(r: &mut R) -> std::io::Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64<R: Read>(r: &mut R) -> std::io::Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::{arc_length, growth_profile, line_trajectory};
    use approx::assert_relative_eq;
    use ndarray::array;

    fn config(width: usize, depth: usize, alpha: f64) -> NetworkConfig {
        NetworkConfig {
            width,
            depth,
            input_dim: width,
            weight_spec: DistributionSpec::gaussian(1.0, alpha).unwrap(),
            bias_spec: DistributionSpec::gaussian(0.01, 1.0).unwrap(),
        }
    }

    #[test]
    fn zero_alpha_gives_zero_weights() {
        let cfg = config(6, 3, 0.0);
        let net = build_network(&cfg, &mut StreamRng::new(1, 0)).unwrap();
        for layer in net.layers() {
            assert!(layer.weights.iter().all(|&w| w == 0.0));
        }
        assert_eq!(net.sparsity_fraction(), 1.0);
    }

    #[test]
    fn nonzero_fraction_matches_binomial_oracle() {
        // 12 * 784^2 entries at alpha = 0.5: se = sqrt(0.25/n) ~ 1.8e-4,
        // tolerance 0.003 is over 4 sigma.
        let cfg = config(784, 12, 0.5);
        let net = build_network(&cfg, &mut StreamRng::new(7, 3)).unwrap();
        let nonzero = 1.0 - net.sparsity_fraction();
        assert!((nonzero - 0.5).abs() <= 0.003, "nonzero fraction {nonzero}");
    }

    #[test]
    fn same_key_same_network() {
        let cfg = config(16, 4, 0.7);
        let a = build_network(&cfg, &mut StreamRng::new(9, 2)).unwrap();
        let b = build_network(&cfg, &mut StreamRng::new(9, 2)).unwrap();
        assert_eq!(a, b);
        let c = build_network(&cfg, &mut StreamRng::new(9, 3)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn forward_identity_layer() {
        let cfg = config(2, 1, 1.0);
        let mut net = build_network(&cfg, &mut StreamRng::new(1, 1)).unwrap();
        net.layers[0].weights = array![[1.0, 0.0], [0.0, 1.0]];
        net.layers[0].biases = array![0.0, 0.0];
        let input = line_trajectory(&[1.0, -1.0], &[2.0, -2.0], 1).unwrap();
        let trace = net.forward_trace(&input).unwrap();
        assert_eq!(trace.pre[0].point(0).to_vec(), vec![1.0, -1.0]);
        assert_eq!(trace.post[0].point(0).to_vec(), vec![1.0, 0.0]);
    }

    #[test]
    fn zero_weights_propagate_bias_constant() {
        let mut cfg = config(5, 2, 0.0);
        cfg.bias_spec = DistributionSpec::uniform(0.01, 1.0).unwrap();
        let net = build_network(&cfg, &mut StreamRng::new(3, 0)).unwrap();
        let input =
            line_trajectory(&[1.0, 0.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0, 0.0], 4).unwrap();
        let trace = net.forward_trace(&input).unwrap();
        // Every post-activation point equals relu(b), constant over t.
        let expected: Vec<f64> = net.layers()[0].biases.iter().map(|&b| b.max(0.0)).collect();
        for i in 0..trace.post[0].n_points() {
            assert_eq!(trace.post[0].point(i).to_vec(), expected);
        }
        assert_eq!(arc_length(&trace.post[0]), 0.0);
    }

    #[test]
    fn positive_homogeneity_with_zero_bias() {
        let cfg = config(12, 3, 1.0);
        let mut net = build_network(&cfg, &mut StreamRng::new(5, 1)).unwrap();
        for layer in net.layers.iter_mut() {
            layer.biases.fill(0.0);
        }
        let x0: Vec<f64> = (0..12).map(|i| (i as f64 * 0.7).sin()).collect();
        let x1: Vec<f64> = (0..12).map(|i| (i as f64 * 0.3).cos()).collect();
        let input = line_trajectory(&x0, &x1, 32).unwrap();
        let base = net.growth_profile(&input).unwrap();
        let scaled = net.with_scaled_weights(2.0).growth_profile(&input).unwrap();
        for d in 1..=3usize {
            let factor = 2.0f64.powi(d as i32);
            assert_relative_eq!(
                scaled.lengths[d],
                factor * base.lengths[d],
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn active_set_examples() {
        let v = array![1.0, -1.0, 0.5];
        assert_eq!(active_set(v.view()), vec![0, 2]);
        let neg = array![-1.0, -0.5, 0.0];
        assert!(active_set(neg.view()).is_empty());
    }

    #[test]
    fn dense_continuous_weights_have_no_exact_zeros() {
        let cfg = config(32, 3, 1.0);
        let net = build_network(&cfg, &mut StreamRng::new(8, 0)).unwrap();
        assert_eq!(net.sparsity_fraction(), 0.0);
    }

    #[test]
    fn zero_weight_growth_profile_is_all_zero() {
        let cfg = config(6, 3, 0.0);
        let net = build_network(&cfg, &mut StreamRng::new(4, 0)).unwrap();
        let input = line_trajectory(
            &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
            8,
        )
        .unwrap();
        let profile = net.growth_profile(&input).unwrap();
        assert!(profile.lengths[0] > 0.0);
        assert!(profile.lengths[1..].iter().all(|&l| l == 0.0));
        assert!(profile.mean_ratios.iter().all(|&r| r == 0.0));
        // Layer 1 kills every segment; deeper transitions see only dead ones.
        assert_eq!(profile.dead_fractions[0], 0.0);
        assert!(profile.dead_fractions[1..].iter().all(|&f| f == 1.0));
    }

    #[test]
    fn streaming_profile_matches_trace_profile() {
        let cfg = config(10, 4, 0.6);
        let net = build_network(&cfg, &mut StreamRng::new(21, 5)).unwrap();
        let x0: Vec<f64> = (0..10).map(|i| (i as f64).sin()).collect();
        let x1: Vec<f64> = (0..10).map(|i| (i as f64).cos()).collect();
        let input = line_trajectory(&x0, &x1, 50).unwrap();
        let streamed = net.growth_profile(&input).unwrap();
        let trace = net.forward_trace(&input).unwrap();
        let from_trace = growth_profile(&trace, &input).unwrap();
        assert_eq!(streamed.lengths, from_trace.lengths);
        assert_eq!(streamed.pre_lengths, from_trace.pre_lengths);
        assert_eq!(streamed.mean_ratios, from_trace.mean_ratios);
        assert_eq!(streamed.dead_fractions, from_trace.dead_fractions);
    }

    #[test]
    fn input_dim_mismatch_rejected() {
        let cfg = config(4, 2, 1.0);
        let net = build_network(&cfg, &mut StreamRng::new(2, 0)).unwrap();
        let input = line_trajectory(&[0.0, 0.0], &[1.0, 1.0], 4).unwrap();
        assert!(net.forward_trace(&input).is_err());
    }

    #[test]
    fn rectangular_first_layer_supported() {
        let cfg = NetworkConfig {
            input_dim: 3,
            ..config(8, 2, 1.0)
        };
        let net = build_network(&cfg, &mut StreamRng::new(2, 0)).unwrap();
        assert_eq!(net.layers()[0].weights.dim(), (8, 3));
        assert_eq!(net.layers()[1].weights.dim(), (8, 8));
        let input = line_trajectory(&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0], 4).unwrap();
        let trace = net.forward_trace(&input).unwrap();
        assert_eq!(trace.post[1].dim(), 8);
    }

    #[test]
    fn dump_round_trip_is_bit_exact() {
        let cfg = config(6, 3, 0.5);
        let net = build_network(&cfg, &mut StreamRng::new(77, 8)).unwrap();
        let mut buf = Vec::new();
        write_network(&net, &mut buf).unwrap();
        let back = read_network(buf.as_slice()).unwrap();
        assert_eq!(net, back);
    }

    #[test]
    fn dump_rejects_corruption() {
        let cfg = config(3, 1, 1.0);
        let net = build_network(&cfg, &mut StreamRng::new(1, 0)).unwrap();
        let mut buf = Vec::new();
        write_network(&net, &mut buf).unwrap();
        let mut bad_magic = buf.clone();
        bad_magic[0] = b'X';
        assert!(read_network(bad_magic.as_slice()).is_err());
        let truncated = &buf[..buf.len() - 3];
        assert!(read_network(truncated).is_err());
    }

    #[test]
    fn bias_sparsity_rejected() {
        let mut cfg = config(4, 1, 1.0);
        cfg.bias_spec = DistributionSpec::gaussian(0.01, 0.5).unwrap();
        assert!(build_network(&cfg, &mut StreamRng::new(0, 0)).is_err());
    }
}
