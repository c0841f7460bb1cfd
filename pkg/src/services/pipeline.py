"""
Per-submap processing

Submap -> object instances -> local descriptors -> scene graph -> enriched
graph with global embedding, plus the record stored in the place index.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence

from ..config import PipelineConfig
from ..models import DESCRIPTOR_DIM, IndexRecord, NetWeights, ObjectInstance, SceneGraph, Submap
from .descriptors import DescriptorBackend, describe_instances, get_descriptor_backend
from .graph_network import build_graph, embed_graph, empty_graph, load_or_initialize_weights
from .instance_clustering import cluster


logger = logging.getLogger(__name__)


def weights_for(config: PipelineConfig) -> NetWeights:
    """Network weights named by the config, or seeded ones with its dimensions"""
    return load_or_initialize_weights(
        config.weights_path,
        seed=config.weights_seed,
        descriptor_dim=DESCRIPTOR_DIM,
        hidden_dim=config.egnn_hidden,
        layers=config.egnn_layers,
        enriched_dim=config.enriched_dim,
        embedding_dim=config.embedding_dim,
        slices=config.tnn_slices,
        gem_lambda=config.gem_lambda,
    )


class SubmapProcessor:
    """Turns submaps into embedded scene graphs with one fixed network"""

    def __init__(
        self,
        config: Optional[PipelineConfig] = None,
        weights: Optional[NetWeights] = None,
        backend: Optional[DescriptorBackend] = None,
        name: str = "default",
    ):
        self.config = config or PipelineConfig()
        self.weights = weights or weights_for(self.config)
        self.backend = backend or get_descriptor_backend(self.config.descriptor_backend)
        self.logger = logging.getLogger(f"{__name__}.{name}")

    def instances(self, submap: Submap) -> List[ObjectInstance]:
        return cluster(submap.grid, self.config.cluster_params, self.config.sample_points)

    def graph(self, submap: Submap) -> SceneGraph:
        """Scene graph without enrichment; a submap without objects gives an empty graph"""
        instances = self.instances(submap)
        if not instances:
            self.logger.warning(f"Submap {submap.id} has no object instances")
            return empty_graph(self.config.alpha, self.weights.embedding_dim)
        descriptors = describe_instances(instances, self.backend)
        return build_graph(instances, descriptors, self.config.alpha)

    def process(self, submap: Submap) -> SceneGraph:
        """Enriched scene graph with its global embedding"""
        graph = embed_graph(self.graph(submap), self.weights)
        self.logger.debug(f"Submap {submap.id}: {graph.num_nodes} objects")
        return graph

    def record(self, submap: Submap) -> IndexRecord:
        graph = self.process(submap)
        return IndexRecord(
            id=submap.id,
            timestamp=submap.timestamp,
            embedding=graph.embedding,
            graph=graph,
            world_pose=submap.origin,
        )

    def records(self, submaps: Sequence[Submap], workers: Optional[int] = None) -> List[IndexRecord]:
        """Records of many submaps, in input order whatever the completion order"""
        workers = workers or self.config.workers
        if workers <= 1:
            records = [self.record(s) for s in submaps]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                records = list(pool.map(self.record, submaps))
        self.logger.info(f"Processed {len(records)} submaps with {workers} worker(s)")
        return records
