//! Brute-force Gibbs averages over all 2^N spin configurations, with the
//! Hamiltonian written out as explicit sums over triples, pairs and sites.

/// Coupling families of the general Hamiltonian for a fixed group labelling.
pub struct Couplings {
    pub groups: Vec<usize>,
    pub cubic: [[[f64; 2]; 2]; 2],
    pub binary: [[f64; 2]; 2],
    pub bias: [f64; 2],
}

impl Couplings {
    pub fn one(n: usize, k: f64, j: f64, h: f64) -> Self {
        Self { groups: vec![0; n], cubic: [[[k; 2]; 2]; 2], binary: [[j; 2]; 2], bias: [h; 2] }
    }

    /// `k = [K111, K112, K122, K222]`, `j = [J11, J12, J22]`, `h = [h1, h2]`.
    pub fn two(n1: usize, n2: usize, k: [f64; 4], j: [f64; 3], h: [f64; 2]) -> Self {
        let mut groups = vec![0; n1];
        groups.extend(std::iter::repeat_n(1, n2));
        let mut cubic = [[[0.0; 2]; 2]; 2];
        for (a, plane) in cubic.iter_mut().enumerate() {
            for (b, row) in plane.iter_mut().enumerate() {
                for (c, v) in row.iter_mut().enumerate() {
                    *v = k[a + b + c];
                }
            }
        }
        let binary = [[j[0], j[1]], [j[1], j[2]]];
        Self { groups, cubic, binary, bias: h }
    }

    /// `H(sigma) = -sum K_ijk s_i s_j s_k - sum J_ij s_i s_j - sum h_i s_i` with
    /// `K_ijk = K_{g(i)g(j)g(k)} / (3 N^2)` and `J_ij = J_{g(i)g(j)} / (2 N)`.
    fn hamiltonian(&self, spins: &[f64]) -> f64 {
        let n = spins.len();
        let nf = n as f64;
        let g = &self.groups;
        let mut cubic = 0.0;
        let mut binary = 0.0;
        let mut bias = 0.0;
        for i in 0..n {
            bias += self.bias[g[i]] * spins[i];
            for j in 0..n {
                let sij = spins[i] * spins[j];
                binary += self.binary[g[i]][g[j]] * sij;
                for k in 0..n {
                    cubic += self.cubic[g[i]][g[j]][g[k]] * sij * spins[k];
                }
            }
        }
        -(cubic / (3.0 * nf * nf) + binary / (2.0 * nf) + bias)
    }
}

pub struct Averages {
    pub p_n: f64,
    pub mean_m: f64,
    pub mean_abs_m: f64,
    pub mean_m2: f64,
}

pub fn enumerate(c: &Couplings) -> Averages {
    let n = c.groups.len();
    let mut log_weights = Vec::with_capacity(1 << n);
    let mut mags = Vec::with_capacity(1 << n);
    let mut spins = vec![0.0; n];
    for config in 0u32..(1 << n) {
        for (i, s) in spins.iter_mut().enumerate() {
            *s = if config >> i & 1 == 1 { 1.0 } else { -1.0 };
        }
        log_weights.push(-c.hamiltonian(&spins));
        mags.push(spins.iter().sum::<f64>() / n as f64);
    }
    let max = log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (mut z, mut s1, mut sa, mut s2) = (0.0, 0.0, 0.0, 0.0);
    for (lw, m) in log_weights.iter().zip(&mags) {
        let w = (lw - max).exp();
        z += w;
        s1 += w * m;
        sa += w * m.abs();
        s2 += w * m * m;
    }
    Averages { p_n: (max + z.ln()) / n as f64, mean_m: s1 / z, mean_abs_m: sa / z, mean_m2: s2 / z }
}
