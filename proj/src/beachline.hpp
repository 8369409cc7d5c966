#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>

namespace vorosense::detail {

/// One parabolic arc of the beach line. Arcs form a red-black tree ordered by
/// position along the beach line; `prev`/`next` thread the in-order sequence.
struct Arc {
  std::size_t site = 0;
  Arc* parent = nullptr;
  Arc* left = nullptr;
  Arc* right = nullptr;
  Arc* prev = nullptr;
  Arc* next = nullptr;
  bool red = true;
  std::int32_t circle_event = -1;
  // Edges traced by the breakpoints (prev, this) and (this, next).
  std::int32_t left_edge = -1;
  std::int32_t right_edge = -1;
};

/// Order is structural: arcs are inserted next to an existing arc, so the tree
/// never compares keys and breakpoint round-off cannot corrupt it.
class Beachline {
 public:
  bool empty() const { return root_ == nullptr; }
  Arc* root() const { return root_; }
  Arc* rightmost() const {
    Arc* n = root_;
    while (n && n->right) n = n->right;
    return n;
  }

  Arc* make_arc(std::size_t site) {
    Arc& a = pool_.emplace_back();
    a.site = site;
    return &a;
  }

  void set_root(Arc* arc) {
    root_ = arc;
    arc->red = false;
  }

  void insert_after(Arc* pos, Arc* node) {
    if (!pos->right) {
      pos->right = node;
      node->parent = pos;
    } else {
      Arc* succ = pos->next;  // leftmost of pos->right
      succ->left = node;
      node->parent = succ;
    }
    node->prev = pos;
    node->next = pos->next;
    if (pos->next) pos->next->prev = node;
    pos->next = node;
    insert_fixup(node);
  }

  void insert_before(Arc* pos, Arc* node) {
    if (!pos->left) {
      pos->left = node;
      node->parent = pos;
    } else {
      Arc* pred = pos->prev;  // rightmost of pos->left
      pred->right = node;
      node->parent = pred;
    }
    node->next = pos;
    node->prev = pos->prev;
    if (pos->prev) pos->prev->next = node;
    pos->prev = node;
    insert_fixup(node);
  }

  void remove(Arc* z) {
    if (z->prev) z->prev->next = z->next;
    if (z->next) z->next->prev = z->prev;

    Arc* y = z;
    bool removed_red = y->red;
    Arc* x = nullptr;
    Arc* x_parent = nullptr;
    if (!z->left) {
      x = z->right;
      x_parent = z->parent;
      transplant(z, z->right);
    } else if (!z->right) {
      x = z->left;
      x_parent = z->parent;
      transplant(z, z->left);
    } else {
      y = minimum(z->right);
      removed_red = y->red;
      x = y->right;
      if (y->parent == z) {
        x_parent = y;
      } else {
        x_parent = y->parent;
        transplant(y, y->right);
        y->right = z->right;
        y->right->parent = y;
      }
      transplant(z, y);
      y->left = z->left;
      y->left->parent = y;
      y->red = z->red;
    }
    if (!removed_red) erase_fixup(x, x_parent);
    z->parent = z->left = z->right = z->prev = z->next = nullptr;
  }

  /// Black height of the tree, or -1 when a red-black rule is violated.
  int validate() const { return validate(root_); }

 private:
  static bool is_red(const Arc* n) { return n && n->red; }
  static bool is_black(const Arc* n) { return !is_red(n); }
  static Arc* minimum(Arc* n) {
    while (n->left) n = n->left;
    return n;
  }

  int validate(const Arc* n) const {
    if (!n) return 1;
    if (n->red && (is_red(n->left) || is_red(n->right))) return -1;
    if ((n->left && n->left->parent != n) || (n->right && n->right->parent != n)) return -1;
    const int l = validate(n->left);
    const int r = validate(n->right);
    if (l < 0 || r < 0 || l != r) return -1;
    return l + (n->red ? 0 : 1);
  }

  void transplant(Arc* u, Arc* v) {
    if (!u->parent) {
      root_ = v;
    } else if (u == u->parent->left) {
      u->parent->left = v;
    } else {
      u->parent->right = v;
    }
    if (v) v->parent = u->parent;
  }

  void rotate_left(Arc* x) {
    Arc* y = x->right;
    x->right = y->left;
    if (y->left) y->left->parent = x;
    transplant(x, y);
    y->left = x;
    x->parent = y;
  }

  void rotate_right(Arc* x) {
    Arc* y = x->left;
    x->left = y->right;
    if (y->right) y->right->parent = x;
    transplant(x, y);
    y->right = x;
    x->parent = y;
  }

  void insert_fixup(Arc* z) {
    z->red = true;
    z->left = z->right = nullptr;
    while (is_red(z->parent)) {
      Arc* p = z->parent;
      Arc* g = p->parent;
      if (p == g->left) {
        Arc* uncle = g->right;
        if (is_red(uncle)) {
          p->red = false;
          uncle->red = false;
          g->red = true;
          z = g;
        } else {
          if (z == p->right) {
            z = p;
            rotate_left(z);
            p = z->parent;
          }
          p->red = false;
          g->red = true;
          rotate_right(g);
        }
      } else {
        Arc* uncle = g->left;
        if (is_red(uncle)) {
          p->red = false;
          uncle->red = false;
          g->red = true;
          z = g;
        } else {
          if (z == p->left) {
            z = p;
            rotate_right(z);
            p = z->parent;
          }
          p->red = false;
          g->red = true;
          rotate_left(g);
        }
      }
    }
    root_->red = false;
  }

  void erase_fixup(Arc* x, Arc* parent) {
    while (x != root_ && is_black(x)) {
      if (x == parent->left) {
        Arc* w = parent->right;
        if (is_red(w)) {
          w->red = false;
          parent->red = true;
          rotate_left(parent);
          w = parent->right;
        }
        if (is_black(w->left) && is_black(w->right)) {
          w->red = true;
          x = parent;
          parent = x->parent;
        } else {
          if (is_black(w->right)) {
            w->left->red = false;
            w->red = true;
            rotate_right(w);
            w = parent->right;
          }
          w->red = parent->red;
          parent->red = false;
          if (w->right) w->right->red = false;
          rotate_left(parent);
          x = root_;
        }
      } else {
        Arc* w = parent->left;
        if (is_red(w)) {
          w->red = false;
          parent->red = true;
          rotate_right(parent);
          w = parent->left;
        }
        if (is_black(w->left) && is_black(w->right)) {
          w->red = true;
          x = parent;
          parent = x->parent;
        } else {
          if (is_black(w->left)) {
            w->right->red = false;
            w->red = true;
            rotate_left(w);
            w = parent->left;
          }
          w->red = parent->red;
          parent->red = false;
          if (w->left) w->left->red = false;
          rotate_right(parent);
          x = root_;
        }
      }
    }
    if (x) x->red = false;
  }

  Arc* root_ = nullptr;
  std::deque<Arc> pool_;
};

}  // namespace vorosense::detail
