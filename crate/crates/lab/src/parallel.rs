use std::num::NonZeroUsize;
use std::thread;

pub const THREADS_ENV: &str = "PURSUIT_LAB_THREADS";

/// Worker cap: `PURSUIT_LAB_THREADS` if it parses as a positive integer,
/// else the machine's available parallelism.
pub fn thread_cap() -> usize {
    let available = thread::available_parallelism().map_or(1, NonZeroUsize::get);
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<NonZeroUsize>() {
            Ok(n) => n.get(),
            Err(_) => {
                eprintln!("warning: ignoring {THREADS_ENV}={v:?}; expected a positive integer");
                available
            }
        },
        Err(_) => available,
    }
}

/// Map `f` over `items` on at most `cap` scoped threads, preserving order.
pub fn map_limited<T, R, F>(items: Vec<T>, cap: usize, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync,
{
    if cap <= 1 || items.len() <= 1 {
        return items.into_iter().map(f).collect();
    }
    let mut out = Vec::with_capacity(items.len());
    let mut items = items.into_iter().peekable();
    while items.peek().is_some() {
        let batch: Vec<T> = items.by_ref().take(cap).collect();
        thread::scope(|s| {
            let handles: Vec<_> = batch.into_iter().map(|item| s.spawn(|| f(item))).collect();
            out.extend(handles.into_iter().map(|h| h.join().expect("worker panicked")));
        });
    }
    out
}
