use std::collections::HashMap;
use std::time::Instant;

/// Buckets idle long enough to be full again are dropped once the map
/// grows past this size.
const PRUNE_THRESHOLD: usize = 10_000;

#[derive(Debug, Clone, Copy)]
struct Bucket {
    tokens: f64,
    last: Instant,
}

/// Per-client token bucket. A client may spend `rate_per_min + burst`
/// requests at once; tokens refill at `rate_per_min` per minute.
#[derive(Debug)]
pub struct RateLimiter {
    capacity: f64,
    refill_per_sec: f64,
    buckets: HashMap<String, Bucket>,
}

impl RateLimiter {
    pub fn new(rate_per_min: u32, burst: u32) -> Self {
        RateLimiter {
            capacity: f64::from(rate_per_min + burst),
            refill_per_sec: f64::from(rate_per_min) / 60.0,
            buckets: HashMap::new(),
        }
    }

    /// Take one token for `key` at time `now`. Returns `Err(wait_secs)`
    /// with the time until the next token when the bucket is empty.
    pub fn check(&mut self, key: &str, now: Instant) -> Result<(), u64> {
        if self.buckets.len() > PRUNE_THRESHOLD {
            let (cap, rate) = (self.capacity, self.refill_per_sec);
            self.buckets
                .retain(|_, b| b.tokens + now.saturating_duration_since(b.last).as_secs_f64() * rate < cap);
        }
        let capacity = self.capacity;
        let bucket = self.buckets.entry(key.to_string()).or_insert(Bucket { tokens: capacity, last: now });
        let elapsed = now.saturating_duration_since(bucket.last).as_secs_f64();
        bucket.tokens = (bucket.tokens + elapsed * self.refill_per_sec).min(capacity);
        bucket.last = now;
        if bucket.tokens >= 1.0 {
            bucket.tokens -= 1.0;
            Ok(())
        } else if self.refill_per_sec > 0.0 {
            Err(((1.0 - bucket.tokens) / self.refill_per_sec).ceil() as u64)
        } else {
            Err(u64::MAX)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::Duration;

    #[test]
    fn ten_per_minute_pass() {
        let t0 = Instant::now();
        let mut rl = RateLimiter::new(10, 5);
        for i in 0..10 {
            assert!(rl.check("c", t0 + Duration::from_secs(6 * i)).is_ok());
        }
    }

    #[test]
    fn sixteenth_rapid_request_denied_then_refills() {
        let t0 = Instant::now();
        let mut rl = RateLimiter::new(10, 5);
        for _ in 0..15 {
            assert!(rl.check("c", t0).is_ok());
        }
        assert!(rl.check("c", t0).is_err());
        assert!(rl.check("other", t0).is_ok(), "keys are independent");
        assert!(rl.check("c", t0 + Duration::from_secs(60)).is_ok());
    }
}
