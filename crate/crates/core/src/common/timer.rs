use std::time::Instant;

#[derive(Debug, Clone, Default)]
struct Stopwatch {
    elapsed: f64,
    started: Option<Instant>,
}

/// Indexed stopwatches. Reading a stopped timer yields the sum of its
/// start/stop intervals; reading a running one includes the open interval.
#[derive(Debug, Clone)]
pub struct TimerSet {
    timers: Vec<Stopwatch>,
}

impl TimerSet {
    pub fn new(n: usize) -> Self {
        Self {
            timers: vec![Stopwatch::default(); n],
        }
    }

    pub fn clear(&mut self, n: usize) {
        self.timers[n] = Stopwatch::default();
    }

    pub fn start(&mut self, n: usize) {
        self.timers[n].started = Some(Instant::now());
    }

    pub fn stop(&mut self, n: usize) {
        let t = &mut self.timers[n];
        if let Some(s) = t.started.take() {
            t.elapsed += s.elapsed().as_secs_f64();
        }
    }

    pub fn is_running(&self, n: usize) -> bool {
        self.timers[n].started.is_some()
    }

    pub fn read(&self, n: usize) -> f64 {
        let t = &self.timers[n];
        t.elapsed + t.started.map_or(0.0, |s| s.elapsed().as_secs_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::Duration;

    #[test]
    fn accumulates_intervals() {
        let mut t = TimerSet::new(2);
        t.start(0);
        std::thread::sleep(Duration::from_millis(5));
        t.stop(0);
        let first = t.read(0);
        assert!(first >= 0.005);
        t.start(0);
        std::thread::sleep(Duration::from_millis(5));
        t.stop(0);
        assert!(t.read(0) >= first + 0.005);
        assert_eq!(t.read(1), 0.0);
        t.clear(0);
        assert_eq!(t.read(0), 0.0);
    }
}
