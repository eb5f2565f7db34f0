//! A minimal arena DOM built by the html5ever tree builder.

use std::borrow::Cow;
use std::cell::{Ref, RefCell};

use ego_tree::{NodeId, NodeRef, Tree};
use html5ever::tendril::{StrTendril, TendrilSink};
use html5ever::tree_builder::{ElementFlags, NodeOrText, QuirksMode, TreeSink};
use html5ever::{expanded_name, local_name, ns, parse_document, Attribute, QualName};

#[derive(Debug, Clone)]
pub struct Element {
    pub name: QualName,
    pub attrs: Vec<(String, String)>,
}

impl Element {
    /// Lowercase local name, e.g. `"p"`.
    pub fn name(&self) -> &str {
        &self.name.local
    }

    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone)]
pub enum Node {
    Document,
    /// Template contents.
    Fragment,
    Element(Element),
    Text(String),
    Other,
}

impl Node {
    pub fn as_element(&self) -> Option<&Element> {
        match self {
            Node::Element(e) => Some(e),
            _ => None,
        }
    }
}

#[derive(Debug)]
pub struct Html {
    pub tree: Tree<Node>,
}

impl Html {
    pub fn parse_document(html: &str) -> Html {
        parse_document(Sink(RefCell::new(Tree::new(Node::Document))), Default::default()).one(html)
    }

    /// The `<html>` element, which the tree builder always creates.
    pub fn root_element(&self) -> NodeRef<'_, Node> {
        self.tree
            .root()
            .children()
            .find(|n| n.value().as_element().is_some())
            .expect("tree builder always creates <html>")
    }

    /// Elements in document order.
    pub fn elements(&self) -> impl Iterator<Item = (NodeRef<'_, Node>, &Element)> {
        self.tree.root().descendants().filter_map(|n| n.value().as_element().map(|e| (n, e)))
    }
}

/// Concatenated text of all descendant text nodes.
pub fn text_of(node: NodeRef<'_, Node>) -> String {
    let mut out = String::new();
    for n in node.descendants() {
        if let Node::Text(t) = n.value() {
            out.push_str(t);
        }
    }
    out
}

struct Sink(RefCell<Tree<Node>>);

impl Sink {
    fn push_text(tree: &mut Tree<Node>, parent: NodeId, text: &str) {
        let mut parent = tree.get_mut(parent).expect("live node");
        if let Some(mut last) = parent.last_child() {
            if let Node::Text(t) = last.value() {
                t.push_str(text);
                return;
            }
        }
        parent.append(Node::Text(text.to_string()));
    }
}

impl TreeSink for Sink {
    type Handle = NodeId;
    type Output = Html;
    type ElemName<'a> = Ref<'a, QualName>;

    fn finish(self) -> Html {
        Html { tree: self.0.into_inner() }
    }

    fn parse_error(&self, _msg: Cow<'static, str>) {}

    fn get_document(&self) -> NodeId {
        self.0.borrow().root().id()
    }

    fn elem_name<'a>(&'a self, target: &'a NodeId) -> Ref<'a, QualName> {
        Ref::map(self.0.borrow(), |tree| match tree.get(*target).expect("live node").value() {
            Node::Element(e) => &e.name,
            _ => panic!("elem_name called on a non-element"),
        })
    }

    fn create_element(&self, name: QualName, attrs: Vec<Attribute>, _flags: ElementFlags) -> NodeId {
        let template = name.expanded() == expanded_name!(html "template");
        let attrs = attrs.into_iter().map(|a| (a.name.local.to_string(), a.value.to_string())).collect();
        let mut tree = self.0.borrow_mut();
        let mut node = tree.orphan(Node::Element(Element { name, attrs }));
        if template {
            node.append(Node::Fragment);
        }
        node.id()
    }

    fn create_comment(&self, _text: StrTendril) -> NodeId {
        self.0.borrow_mut().orphan(Node::Other).id()
    }

    fn create_pi(&self, _target: StrTendril, _data: StrTendril) -> NodeId {
        self.0.borrow_mut().orphan(Node::Other).id()
    }

    fn append(&self, parent: &NodeId, child: NodeOrText<NodeId>) {
        let mut tree = self.0.borrow_mut();
        match child {
            NodeOrText::AppendNode(id) => {
                tree.get_mut(*parent).expect("live node").append_id(id);
            }
            NodeOrText::AppendText(text) => Sink::push_text(&mut tree, *parent, &text),
        }
    }

    fn append_based_on_parent_node(&self, element: &NodeId, prev_element: &NodeId, child: NodeOrText<NodeId>) {
        let has_parent = self.0.borrow().get(*element).expect("live node").parent().is_some();
        if has_parent {
            self.append_before_sibling(element, child);
        } else {
            self.append(prev_element, child);
        }
    }

    fn append_doctype_to_document(&self, _name: StrTendril, _public_id: StrTendril, _system_id: StrTendril) {}

    fn get_template_contents(&self, target: &NodeId) -> NodeId {
        let tree = self.0.borrow();
        let node = tree.get(*target).expect("live node");
        node.first_child().filter(|c| matches!(c.value(), Node::Fragment)).map_or(*target, |c| c.id())
    }

    fn same_node(&self, x: &NodeId, y: &NodeId) -> bool {
        x == y
    }

    fn set_quirks_mode(&self, _mode: QuirksMode) {}

    fn append_before_sibling(&self, sibling: &NodeId, new_node: NodeOrText<NodeId>) {
        let mut tree = self.0.borrow_mut();
        match new_node {
            NodeOrText::AppendNode(id) => {
                tree.get_mut(id).expect("live node").detach();
                tree.get_mut(*sibling).expect("live node").insert_id_before(id);
            }
            NodeOrText::AppendText(text) => {
                let mut sib = tree.get_mut(*sibling).expect("live node");
                if let Some(mut prev) = sib.prev_sibling() {
                    if let Node::Text(t) = prev.value() {
                        t.push_str(&text);
                        return;
                    }
                }
                sib.insert_before(Node::Text(text.to_string()));
            }
        }
    }

    fn add_attrs_if_missing(&self, target: &NodeId, attrs: Vec<Attribute>) {
        let mut tree = self.0.borrow_mut();
        let mut node = tree.get_mut(*target).expect("live node");
        if let Node::Element(e) = node.value() {
            for a in attrs {
                let name = a.name.local.to_string();
                if e.attr(&name).is_none() {
                    e.attrs.push((name, a.value.to_string()));
                }
            }
        }
    }

    fn remove_from_parent(&self, target: &NodeId) {
        self.0.borrow_mut().get_mut(*target).expect("live node").detach();
    }

    fn reparent_children(&self, node: &NodeId, new_parent: &NodeId) {
        self.0.borrow_mut().get_mut(*new_parent).expect("live node").reparent_from_id_append(*node);
    }
}
