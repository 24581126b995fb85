use std::collections::HashMap;

use super::IdBuild;
use crate::error::{invalid, Result};
use crate::traffic::DocId;

const NIL: usize = usize::MAX;

#[derive(Debug, Clone)]
struct Node {
    doc: DocId,
    prev: usize,
    next: usize,
}

/// LRU recency list: a doubly linked list over a slab, indexed by document.
///
/// `access` is O(1) amortized. Slots of evicted documents are reused, so the
/// slab never exceeds `capacity` nodes.
#[derive(Debug, Clone)]
pub struct LruState {
    capacity: usize,
    nodes: Vec<Node>,
    index: HashMap<DocId, usize, IdBuild>,
    head: usize,
    tail: usize,
}

impl LruState {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(invalid("capacity", "must be >= 1"));
        }
        Ok(Self {
            capacity,
            nodes: Vec::with_capacity(capacity.min(1 << 20)),
            index: HashMap::with_capacity_and_hasher(capacity.min(1 << 20), IdBuild::default()),
            head: NIL,
            tail: NIL,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn contains(&self, doc: DocId) -> bool {
        self.index.contains_key(&doc)
    }

    fn unlink(&mut self, i: usize) {
        let (prev, next) = (self.nodes[i].prev, self.nodes[i].next);
        if prev != NIL {
            self.nodes[prev].next = next;
        } else {
            self.head = next;
        }
        if next != NIL {
            self.nodes[next].prev = prev;
        } else {
            self.tail = prev;
        }
    }

    fn push_front(&mut self, i: usize) {
        self.nodes[i].prev = NIL;
        self.nodes[i].next = self.head;
        if self.head != NIL {
            self.nodes[self.head].prev = i;
        }
        self.head = i;
        if self.tail == NIL {
            self.tail = i;
        }
    }

    /// Requests `doc`. Returns `true` on a hit. A hit moves the document to
    /// the front; a miss inserts it at the front and evicts the last document
    /// if the list overflows.
    pub fn access(&mut self, doc: DocId) -> bool {
        if let Some(&i) = self.index.get(&doc) {
            if self.head != i {
                self.unlink(i);
                self.push_front(i);
            }
            return true;
        }
        let slot = if self.index.len() == self.capacity {
            let victim = self.tail;
            self.unlink(victim);
            self.index.remove(&self.nodes[victim].doc);
            self.nodes[victim].doc = doc;
            victim
        } else {
            self.nodes.push(Node {
                doc,
                prev: NIL,
                next: NIL,
            });
            self.nodes.len() - 1
        };
        self.push_front(slot);
        self.index.insert(doc, slot);
        false
    }

    /// Documents from most to least recently used.
    pub fn iter(&self) -> impl Iterator<Item = DocId> + '_ {
        let mut cur = self.head;
        std::iter::from_fn(move || {
            if cur == NIL {
                return None;
            }
            let n = &self.nodes[cur];
            cur = n.next;
            Some(n.doc)
        })
    }
}
