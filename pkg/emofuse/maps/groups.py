# Группы параметров каждого графа, допустимые в stages (кроме 'all')
GRAPH_GROUPS = {
    "audio_ffn": ["hidden", "classifier"],
    "audio_gru": ["audio_gru", "attention", "classifier"],
    "visual_gru": ["visual_gru", "attention", "classifier"],
    "early_fusion": ["visual_gru", "audio_gru", "fusion_gru", "attention", "classifier"],
}
