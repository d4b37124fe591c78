/// Sceptic's multiplicative capital `K_0 = 1, K_1, …`, mirrored in the log
/// domain so that exponentially large evidence stays representable.
///
/// Zero is absorbing.
#[derive(Debug, Clone, PartialEq)]
pub struct CapitalProcess {
    values: Vec<f64>,
    log_values: Vec<f64>,
    running_max: f64,
    log_running_max: f64,
}

impl Default for CapitalProcess {
    fn default() -> Self {
        Self::new()
    }
}

impl CapitalProcess {
    pub fn new() -> Self {
        Self {
            values: vec![1.0],
            log_values: vec![0.0],
            running_max: 1.0,
            log_running_max: 0.0,
        }
    }

    /// Multiplies the current capital by `factor` and returns the new value.
    pub fn apply_factor(&mut self, factor: f64) -> f64 {
        let (value, log) = if self.current() == 0.0 || factor == 0.0 {
            (0.0, f64::NEG_INFINITY)
        } else {
            (self.current() * factor, self.current_log() + factor.ln())
        };
        self.push(value, log)
    }

    /// Records a new capital given by its natural logarithm.
    pub fn push_log(&mut self, log: f64) -> f64 {
        if self.current() == 0.0 {
            return self.push(0.0, f64::NEG_INFINITY);
        }
        self.push(log.exp(), log)
    }

    fn push(&mut self, value: f64, log: f64) -> f64 {
        self.values.push(value);
        self.log_values.push(log);
        if value > self.running_max {
            self.running_max = value;
        }
        if log > self.log_running_max {
            self.log_running_max = log;
        }
        value
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }

    pub fn current(&self) -> f64 {
        *self.values.last().expect("K_0 always present")
    }

    pub fn current_log(&self) -> f64 {
        *self.log_values.last().expect("K_0 always present")
    }

    pub fn running_max(&self) -> f64 {
        self.running_max
    }

    pub fn log_running_max(&self) -> f64 {
        self.log_running_max
    }

    /// Number of completed steps.
    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn is_bankrupt(&self) -> bool {
        self.current() == 0.0
    }
}
