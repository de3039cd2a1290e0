//! In-memory sessions holding a proposed expansion between requests.

use std::collections::HashMap;
use std::sync::Mutex;
use std::time::{Duration, Instant, SystemTime};

use qamar_core::pipeline::Prepared;
use uuid::Uuid;

#[derive(Debug, Clone)]
pub struct Session {
    pub id: Uuid,
    pub text: String,
    /// Candidates with their current selection flags.
    pub prepared: Prepared,
    pub created_at: SystemTime,
    pub updated_at: SystemTime,
    last_access: Instant,
}

/// Sessions expire `ttl` after their last access.
#[derive(Debug)]
pub struct SessionStore {
    ttl: Duration,
    sessions: Mutex<HashMap<Uuid, Session>>,
}

impl SessionStore {
    pub fn new(ttl: Duration) -> Self {
        Self {
            ttl,
            sessions: Mutex::new(HashMap::new()),
        }
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, HashMap<Uuid, Session>> {
        let mut sessions = self.sessions.lock().unwrap_or_else(|e| e.into_inner());
        let ttl = self.ttl;
        sessions.retain(|_, s| s.last_access.elapsed() < ttl);
        sessions
    }

    pub fn create(&self, text: &str, prepared: Prepared) -> Session {
        let now = SystemTime::now();
        let session = Session {
            id: Uuid::new_v4(),
            text: text.to_string(),
            prepared,
            created_at: now,
            updated_at: now,
            last_access: Instant::now(),
        };
        self.lock().insert(session.id, session.clone());
        session
    }

    pub fn get(&self, id: Uuid) -> Option<Session> {
        let mut sessions = self.lock();
        let session = sessions.get_mut(&id)?;
        session.last_access = Instant::now();
        Some(session.clone())
    }

    /// Runs `change` on a copy of the session and stores the copy only if
    /// `change` succeeds. `None` if the session does not exist.
    pub fn update<E>(
        &self,
        id: Uuid,
        change: impl FnOnce(&mut Session) -> Result<(), E>,
    ) -> Option<Result<Session, E>> {
        let mut sessions = self.lock();
        let stored = sessions.get_mut(&id)?;
        stored.last_access = Instant::now();
        let mut copy = stored.clone();
        Some(change(&mut copy).map(|()| {
            copy.updated_at = SystemTime::now();
            *stored = copy.clone();
            copy
        }))
    }

    pub fn len(&self) -> usize {
        self.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
